#include "lsrk/coefficients.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace lsrk {
namespace {

constexpr double kRowSumTol = 1e-12;

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void require_size(const std::vector<double>& v, std::size_t n, const char* field) {
  if (v.size() != n) {
    std::ostringstream msg;
    msg << field << " has " << v.size() << " entries, expected " << n;
    throw InvariantError("vector-length", msg.str());
  }
}

// Register expansion over the basis {u^n, k_1, ..., k_s}.
using Expansion = std::vector<double>;

void axpy(double a, const Expansion& x, Expansion& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

struct Tracked {
  std::vector<double> A;  // row-major s x s
  Expansion S1, S2, S3, S4;
};

// Runs the register recurrence symbolically. Throws if a stage is evaluated
// at a register whose u^n coefficient is not 1.
Tracked track_low_storage(const LowStorageScheme& m, const std::vector<double>& beta) {
  const std::size_t s = m.s;
  const std::size_t n = s + 1;
  Tracked t;
  t.A.assign(s * s, 0.0);
  t.S1.assign(n, 0.0);
  t.S1[0] = 1.0;
  t.S2.assign(n, 0.0);
  t.S3 = t.S1;
  t.S4 = t.S1;
  for (std::size_t i = 0; i < s; ++i) {
    axpy(m.delta[i], t.S1, t.S2);
    if (std::abs(t.S1[0] - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg << "stage " << i + 1 << " is evaluated at a register with u^n coefficient " << t.S1[0];
      throw InvariantError("explicit-reconstruction", msg.str());
    }
    for (std::size_t j = 0; j < s; ++j) t.A[i * s + j] = t.S1[j + 1];
    Expansion next(n, 0.0);
    axpy(m.gamma1[i], t.S1, next);
    axpy(m.gamma2[i], t.S2, next);
    axpy(m.gamma3[i], t.S3, next);
    next[i + 1] += beta[i];
    t.S1 = std::move(next);
    if (m.cls == SchemeClass::ThreeSStarPlus) t.S4[i + 1] += m.bhat[i];
  }
  return t;
}

// Exact rational arithmetic for the SSP3(2)4 reconstruction.
struct Rational {
  long long p = 0;
  long long q = 1;

  Rational() = default;
  Rational(long long num, long long den = 1) : p(num), q(den) { normalize(); }
  void normalize() {
    if (q < 0) p = -p, q = -q;
    const long long g = std::gcd(p < 0 ? -p : p, q);
    if (g > 1) p /= g, q /= g;
  }
  friend Rational operator+(Rational a, Rational b) { return {a.p * b.q + b.p * a.q, a.q * b.q}; }
  friend Rational operator*(Rational a, Rational b) { return {a.p * b.p, a.q * b.q}; }
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

using RExpansion = std::vector<Rational>;

RExpansion rcombine(Rational a, const RExpansion& x, Rational b, const RExpansion& y) {
  RExpansion out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

}  // namespace

std::string_view to_string(SchemeClass cls) {
  return cls == SchemeClass::ThreeSStar ? "3s*" : "3s*+";
}

std::string method_name(const Method& m) {
  return std::visit([](const auto& x) { return x.name; }, m);
}

MethodOrders method_orders(const Method& m) {
  return std::visit([](const auto& x) { return MethodOrders{x.q, x.qhat}; }, m);
}

bool method_fsal(const Method& m) {
  if (const auto* p = std::get_if<ButcherPair>(&m)) return p->fsal;
  if (const auto* l = std::get_if<LowStorageScheme>(&m)) return l->fsal();
  return false;
}

std::size_t method_stages(const Method& m) {
  return std::visit([](const auto& x) -> std::size_t { return x.s; }, m);
}

void ButcherPair::validate() const {
  if (s < 1) throw InvariantError("stage-count", "s must be at least 1");
  require_size(A, s * s, "A");
  require_size(b, s, "b");
  require_size(c, s, "c");
  require_size(bhat, s + 1, "bhat");
  if (!all_finite(A) || !all_finite(b) || !all_finite(c) || !all_finite(bhat))
    throw InvariantError("finite", "coefficients must be finite");
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = i; j < s; ++j) {
      if (a(i, j) != 0.0) {
        std::ostringstream msg;
        msg << "A[" << i << "][" << j << "] = " << a(i, j) << " on or above the diagonal";
        throw InvariantError("explicit", msg.str());
      }
    }
    double row = 0.0;
    for (std::size_t j = 0; j < i; ++j) row += a(i, j);
    if (std::abs(row - c[i]) > kRowSumTol) {
      std::ostringstream msg;
      msg << "c[" << i << "] = " << c[i] << " but row sum of A is " << row;
      throw InvariantError("row-sum", msg.str());
    }
  }
  if (!fsal && bhat[s] != 0.0)
    throw InvariantError("fsal-weight", "bhat[s] must be 0 for a non-FSAL pair");
  if (q < 1 || qhat < 1) throw InvariantError("orders", "q and qhat must be at least 1");
}

std::pair<std::vector<double>, std::vector<double>> ButcherPair::extended_tableau() const {
  const std::size_t n = s + 1;
  std::vector<double> Ae(n * n, 0.0);
  std::vector<double> ce(n, 1.0);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) Ae[i * n + j] = a(i, j);
    ce[i] = c[i];
  }
  for (std::size_t j = 0; j < s; ++j) Ae[s * n + j] = b[j];
  return {std::move(Ae), std::move(ce)};
}

double LowStorageScheme::delta_sum() const {
  return std::accumulate(delta.begin(), delta.end(), 0.0);
}

void LowStorageScheme::validate() const {
  if (s < 1) throw InvariantError("stage-count", "s must be at least 1");
  require_size(gamma1, s, "gamma1");
  require_size(gamma2, s, "gamma2");
  require_size(gamma3, s, "gamma3");
  require_size(beta, s, "beta");
  require_size(c, s, "c");
  require_size(delta, cls == SchemeClass::ThreeSStar ? s + 2 : s, "delta");
  require_size(bhat, s + 1, "bhat");
  for (const auto* v : {&gamma1, &gamma2, &gamma3, &beta, &delta, &c, &bhat})
    if (!all_finite(*v)) throw InvariantError("finite", "coefficients must be finite");
  if (gamma1[0] != 0.0 || gamma2[0] != 1.0 || gamma3[0] != 0.0 || (s > 1 && gamma3[1] != 0.0))
    throw InvariantError("first-stage",
                         "gamma1[0] = 0, gamma2[0] = 1, gamma3[0] = 0 and gamma3[1] = 0 required");
  if (cls == SchemeClass::ThreeSStar) {
    if (delta_sum() == 0.0)
      throw InvariantError("delta-sum", "sum of delta is zero; embedded solution undefined");
    if (bhat[s] != 0.0) throw InvariantError("fsal-weight", "3S* schemes carry no FSAL weight");
  }
  if (q < 1 || qhat < 1) throw InvariantError("orders", "q and qhat must be at least 1");
}

ButcherPair to_butcher(const LowStorageScheme& m) {
  m.validate();
  const std::size_t s = m.s;
  Tracked t = track_low_storage(m, m.beta);
  if (std::abs(t.S1[0] - 1.0) > 1e-12)
    throw InvariantError("explicit-reconstruction", "u^{n+1} has u^n coefficient != 1");

  ButcherPair p;
  p.name = m.name;
  p.s = s;
  p.A = std::move(t.A);
  p.b.assign(t.S1.begin() + 1, t.S1.end());
  p.c.assign(s, 0.0);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < i; ++j) p.c[i] += p.A[i * s + j];
  p.bhat.assign(s + 1, 0.0);
  if (m.cls == SchemeClass::ThreeSStarPlus) {
    p.bhat = m.bhat;
  } else {
    Expansion num = t.S2;
    axpy(m.delta[s], t.S1, num);
    num[0] += m.delta[s + 1];
    const double sum = m.delta_sum();
    if (std::abs(num[0] / sum - 1.0) > 1e-12)
      throw InvariantError("explicit-reconstruction",
                           "embedded solution has u^n coefficient != 1");
    for (std::size_t j = 0; j < s; ++j) p.bhat[j] = num[j + 1] / sum;
  }
  p.fsal = p.bhat[s] != 0.0;
  p.q = m.q;
  p.qhat = m.qhat;
  // the stepper uses the scheme's own c; the tableau uses exact row sums
  for (std::size_t i = 0; i < s; ++i) {
    if (std::abs(p.c[i] - m.c[i]) > 1e-10) {
      std::ostringstream msg;
      msg << "c[" << i << "] = " << m.c[i] << " differs from reconstructed " << p.c[i];
      throw InvariantError("row-sum", msg.str());
    }
  }
  return p;
}

RationalTableau to_rational_butcher(const Ssp43Scheme&) {
  constexpr std::size_t s = Ssp43Scheme::s;
  const Rational half(1, 2), third(1, 3), two_thirds(2, 3), one(1), zero(0);
  RExpansion un(s + 1, zero);
  un[0] = one;
  RExpansion k[s];
  for (std::size_t i = 0; i < s; ++i) {
    k[i].assign(s + 1, zero);
    k[i][i + 1] = one;
  }
  std::vector<RExpansion> stage_at(s);

  stage_at[0] = un;
  RExpansion u = rcombine(one, un, half, k[0]);
  stage_at[1] = u;
  u = rcombine(one, u, half, k[1]);
  stage_at[2] = u;
  u = rcombine(one, u, half, k[2]);
  RExpansion uhat = rcombine(third, un, two_thirds, u);
  u = rcombine(two_thirds, un, third, u);
  stage_at[3] = u;
  u = rcombine(one, u, half, k[3]);
  uhat = rcombine(half, uhat, half, u);

  RationalTableau t;
  t.s = s;
  t.A.assign(s * s, {0, 1});
  t.c.assign(s, {0, 1});
  for (std::size_t i = 0; i < s; ++i) {
    Rational row;
    for (std::size_t j = 0; j < s; ++j) {
      t.A[i * s + j] = {stage_at[i][j + 1].p, stage_at[i][j + 1].q};
      row = row + stage_at[i][j + 1];
    }
    t.c[i] = {row.p, row.q};
  }
  for (std::size_t j = 0; j < s; ++j) {
    t.b.emplace_back(u[j + 1].p, u[j + 1].q);
    t.bhat.emplace_back(uhat[j + 1].p, uhat[j + 1].q);
  }
  t.bhat.emplace_back(0, 1);
  return t;
}

ButcherPair to_butcher(const Ssp43Scheme& scheme) {
  const RationalTableau t = to_rational_butcher(scheme);
  auto val = [](const std::pair<long long, long long>& r) {
    return static_cast<double>(r.first) / static_cast<double>(r.second);
  };
  ButcherPair p;
  p.name = scheme.name;
  p.s = t.s;
  for (const auto& r : t.A) p.A.push_back(val(r));
  for (const auto& r : t.b) p.b.push_back(val(r));
  for (const auto& r : t.c) p.c.push_back(val(r));
  for (const auto& r : t.bhat) p.bhat.push_back(val(r));
  p.fsal = false;
  p.q = Ssp43Scheme::q;
  p.qhat = Ssp43Scheme::qhat;
  return p;
}

ButcherPair to_butcher(const Method& m) {
  return std::visit(
      [](const auto& x) -> ButcherPair {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, ButcherPair>)
          return x;
        else
          return to_butcher(x);
      },
      m);
}

LowStorageScheme three_s_star_plus_from_tables(std::string name, const std::vector<double>& gamma1,
                                               const std::vector<double>& gamma2,
                                               const std::vector<double>& gamma3,
                                               const std::vector<double>& delta,
                                               const std::vector<double>& b,
                                               const std::vector<double>& bhat, bool fsal, int q,
                                               int qhat) {
  LowStorageScheme m;
  m.name = std::move(name);
  m.cls = SchemeClass::ThreeSStarPlus;
  m.s = b.size();
  m.gamma1 = gamma1;
  m.gamma2 = gamma2;
  m.gamma3 = gamma3;
  m.delta = delta;
  m.q = q;
  m.qhat = qhat;
  require_size(bhat, m.s, "bhat");
  m.bhat = bhat;
  double sum = 0.0;
  for (double x : bhat) sum += x;
  m.bhat.push_back(fsal ? 1.0 - sum : 0.0);
  m.beta.assign(m.s, 1.0);
  m.c.assign(m.s, 0.0);
  m.validate();

  // with unit beta, the final k_j coefficient is the propagation factor P_j
  const Tracked unit = track_low_storage(m, m.beta);
  for (std::size_t j = 0; j < m.s; ++j) {
    const double P = unit.S1[j + 1];
    if (std::abs(P) < 1e-14)
      throw InvariantError("register-weights", "stage " + std::to_string(j + 1) +
                                                   " does not reach the final register");
    m.beta[j] = b[j] / P;
  }
  m.c = low_storage_abscissae(m);
  m.validate();
  return m;
}

std::vector<double> low_storage_abscissae(const LowStorageScheme& m) {
  m.validate();
  const Tracked t = track_low_storage(m, m.beta);
  std::vector<double> c(m.s, 0.0);
  for (std::size_t i = 0; i < m.s; ++i)
    for (std::size_t j = 0; j < i; ++j) c[i] += t.A[i * m.s + j];
  return c;
}

// ---------------------------------------------------------------------------
// Order conditions

namespace {

struct Tree {
  const char* id;
  int order;
  double gamma;
};

// Elementary weight vectors through order five, evaluated on a tableau.
struct TreeEval {
  std::size_t n;
  const std::vector<double>& A;
  std::vector<double> mul(const std::vector<double>& x) const {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) y[i] += A[i * n + j] * x[j];
    return y;
  }
};

std::vector<double> hadamard(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] * y[i];
  return z;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum;
}

void append_residuals(const std::vector<double>& A, const std::vector<double>& c,
                      const std::vector<double>& w, int up_to, bool embedded,
                      std::vector<OrderResidual>& out) {
  const std::size_t n = w.size();
  TreeEval T{n, A};
  const std::vector<double> one(n, 1.0);
  const auto c2 = hadamard(c, c);
  const auto c3 = hadamard(c2, c);
  const auto Ac = T.mul(c);
  const auto Ac2 = T.mul(c2);
  const auto AAc = T.mul(Ac);

  struct Entry {
    Tree tree;
    std::vector<double> phi;
  };
  std::vector<Entry> entries{
      {{"b.1", 1, 1.0}, one},
      {{"b.c", 2, 2.0}, c},
      {{"b.c^2", 3, 3.0}, c2},
      {{"b.Ac", 3, 6.0}, Ac},
  };
  if (up_to >= 4) {
    entries.push_back({{"b.c^3", 4, 4.0}, c3});
    entries.push_back({{"b.(c*Ac)", 4, 8.0}, hadamard(c, Ac)});
    entries.push_back({{"b.Ac^2", 4, 12.0}, Ac2});
    entries.push_back({{"b.AAc", 4, 24.0}, AAc});
  }
  if (up_to >= 5) {
    entries.push_back({{"b.c^4", 5, 5.0}, hadamard(c3, c)});
    entries.push_back({{"b.(c^2*Ac)", 5, 10.0}, hadamard(c2, Ac)});
    entries.push_back({{"b.(c*Ac^2)", 5, 15.0}, hadamard(c, Ac2)});
    entries.push_back({{"b.(c*AAc)", 5, 30.0}, hadamard(c, AAc)});
    entries.push_back({{"b.(Ac)^2", 5, 20.0}, hadamard(Ac, Ac)});
    entries.push_back({{"b.Ac^3", 5, 20.0}, T.mul(c3)});
    entries.push_back({{"b.A(c*Ac)", 5, 40.0}, T.mul(hadamard(c, Ac))});
    entries.push_back({{"b.AAc^2", 5, 60.0}, T.mul(Ac2)});
    entries.push_back({{"b.AAAc", 5, 120.0}, T.mul(AAc)});
  }
  for (const auto& e : entries) {
    if (e.tree.order > up_to) continue;
    out.push_back({e.tree.id, e.tree.order, embedded, std::abs(dot(w, e.phi) - 1.0 / e.tree.gamma)});
  }
}

}  // namespace

std::vector<OrderResidual> order_residuals(const ButcherPair& pair, int up_to) {
  if (up_to < 1 || up_to > 5)
    throw std::invalid_argument("order_residuals: up_to must be in 1..5");
  std::vector<OrderResidual> out;
  append_residuals(pair.A, pair.c, pair.b, up_to, false, out);
  const auto [Ae, ce] = pair.extended_tableau();
  append_residuals(Ae, ce, pair.bhat, up_to, true, out);
  return out;
}

double max_order_residual(const ButcherPair& pair, int up_to, bool embedded) {
  double worst = 0.0;
  for (const auto& r : order_residuals(pair, up_to))
    if (r.embedded == embedded) worst = std::max(worst, r.residual);
  return worst;
}

}  // namespace lsrk
