// JSON coefficient files.
//
//   {
//     "name": "RK3(2)5F[3S*+]",
//     "class": "butcher" | "3s*" | "3s*+",
//     "s": 5, "q": 3, "qhat": 2, "fsal": true,
//     "description": "optional free text",
//     butcher:      "A" (s*s, row-major), "b" (s), "c" (s), "bhat" (s+1)
//     3s* / 3s*+:   "gamma1", "gamma2", "gamma3", "beta", "c" (s each),
//                   "delta" (s for 3s*+, s+2 for 3s*), "bhat" (s+1)
//   }
//
// Coefficient arrays hold decimal strings ("0.25", "-1.5e-3") or exact
// fractions ("1/6"). Unknown keys are rejected.

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lsrk/coefficients.hpp"

namespace lsrk {
namespace {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json string_array(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(format_double(x));
  return arr;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

class Reader {
 public:
  Reader(std::string_view text, const json& doc) : text_(text), doc_(doc) {}

  std::size_t line_of(const std::string& key) const {
    const auto pos = text_.find("\"" + key + "\"");
    return pos == std::string_view::npos ? 0 : line_of_offset(text_, pos);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    std::ostringstream msg;
    const std::size_t line = line_of(key);
    msg << "coefficient file";
    if (line > 0) msg << " line " << line;
    msg << ", field '" << key << "': " << what;
    throw CoefficientParseError(msg.str(), line, key);
  }

  const json& get(const std::string& key) const {
    auto it = doc_.find(key);
    if (it == doc_.end()) fail(key, "missing");
    used_.insert(key);
    return *it;
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  std::string str(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }

  int integer(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key, std::size_t expected) const {
    const json& v = get(key);
    if (!v.is_array()) fail(key, "expected an array of decimal strings");
    if (v.size() != expected)
      fail(key, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(key, "entry " + std::to_string(i) + " is not a string");
      const std::string s = v[i].get<std::string>();
      double x = 0.0;
      if (!parse_number(s, x)) fail(key, "entry " + std::to_string(i) + " '" + s + "' is not a number");
      out.push_back(x);
    }
    return out;
  }

  void reject_unknown() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it)
      if (!used_.count(it.key())) fail(it.key(), "unknown field");
  }

 private:
  static bool parse_decimal(std::string_view s, double& x) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
  }

  static bool parse_number(std::string_view s, double& x) {
    const auto slash = s.find('/');
    if (slash == std::string_view::npos) return parse_decimal(s, x);
    double num = 0.0, den = 0.0;
    if (!parse_decimal(s.substr(0, slash), num) || !parse_decimal(s.substr(slash + 1), den) ||
        den == 0.0)
      return false;
    x = num / den;
    return true;
  }

  std::string_view text_;
  const json& doc_;
  mutable std::set<std::string> used_;
};

}  // namespace

std::string export_coefficients(const Method& m) {
  json doc;
  doc["name"] = method_name(m);
  const MethodOrders o = method_orders(m);
  doc["q"] = o.q;
  doc["qhat"] = o.qhat;
  doc["fsal"] = method_fsal(m);
  doc["s"] = method_stages(m);
  if (const auto* ls = std::get_if<LowStorageScheme>(&m)) {
    doc["class"] = std::string(to_string(ls->cls));
    doc["gamma1"] = string_array(ls->gamma1);
    doc["gamma2"] = string_array(ls->gamma2);
    doc["gamma3"] = string_array(ls->gamma3);
    doc["beta"] = string_array(ls->beta);
    doc["delta"] = string_array(ls->delta);
    doc["c"] = string_array(ls->c);
    doc["bhat"] = string_array(ls->bhat);
  } else {
    // SSP3(2)4 is written as its dense tableau
    const ButcherPair p = to_butcher(m);
    doc["class"] = "butcher";
    doc["A"] = string_array(p.A);
    doc["b"] = string_array(p.b);
    doc["c"] = string_array(p.c);
    doc["bhat"] = string_array(p.bhat);
  }
  return doc.dump(2) + "\n";
}

Method parse_coefficients(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    throw CoefficientParseError("coefficient file line " + std::to_string(line) + ": " + e.what(),
                                line, "");
  }
  if (!doc.is_object()) throw CoefficientParseError("coefficient file: expected a JSON object", 1, "");

  Reader r(text, doc);
  const std::string name = r.str("name");
  const std::string cls = r.str("class");
  const int s_int = r.integer("s");
  if (s_int < 1) r.fail("s", "stage count must be at least 1");
  const auto s = static_cast<std::size_t>(s_int);
  const int q = r.integer("q");
  const int qhat = r.integer("qhat");
  const bool fsal = r.boolean("fsal");
  if (r.has("description")) r.str("description");

  Method out;
  if (cls == "butcher") {
    ButcherPair p;
    p.name = name;
    p.s = s;
    p.q = q;
    p.qhat = qhat;
    p.fsal = fsal;
    p.A = r.numbers("A", s * s);
    p.b = r.numbers("b", s);
    p.c = r.numbers("c", s);
    p.bhat = r.numbers("bhat", s + 1);
    r.reject_unknown();
    p.validate();
    out = std::move(p);
  } else if (cls == "3s*" || cls == "3s*+") {
    LowStorageScheme m;
    m.name = name;
    m.cls = cls == "3s*" ? SchemeClass::ThreeSStar : SchemeClass::ThreeSStarPlus;
    m.s = s;
    m.q = q;
    m.qhat = qhat;
    m.gamma1 = r.numbers("gamma1", s);
    m.gamma2 = r.numbers("gamma2", s);
    m.gamma3 = r.numbers("gamma3", s);
    m.beta = r.numbers("beta", s);
    m.delta = r.numbers("delta", m.cls == SchemeClass::ThreeSStar ? s + 2 : s);
    m.c = r.numbers("c", s);
    m.bhat = r.numbers("bhat", s + 1);
    r.reject_unknown();
    if (m.fsal() != fsal)
      throw InvariantError("fsal-weight", "fsal flag disagrees with bhat[s]");
    to_butcher(m);  // validates, including the abscissae
    out = std::move(m);
  } else {
    r.fail("class", "expected \"butcher\", \"3s*\" or \"3s*+\", got \"" + cls + "\"");
  }
  return out;
}

Method load_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open coefficient file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_coefficients(buf.str());
}

Method resolve_method(std::string_view scheme, const std::filesystem::path& coeff_file,
                      std::string* warning) {
  if (coeff_file.empty()) return catalog_get(scheme);
  Method m = load_coefficients(coeff_file);
  if (warning) {
    warning->clear();
    const std::string name = method_name(m);
    try {
      catalog_get(name);
      *warning = "coefficient file '" + coeff_file.string() + "' overrides built-in method '" +
                 name + "'";
    } catch (const UnknownMethodError&) {
    }
    if (!scheme.empty() && warning->empty()) {
      try {
        catalog_get(scheme);
        *warning = "coefficient file '" + coeff_file.string() + "' overrides --scheme '" +
                   std::string(scheme) + "'";
      } catch (const UnknownMethodError&) {
      }
    }
  }
  return m;
}

}  // namespace lsrk
