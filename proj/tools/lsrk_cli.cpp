// lsrk: command line front end.
//
// Exit codes: 0 ok, 1 usage error, 2 numerical failure, 3 empty result.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lsrk/coefficients.hpp"
#include "lsrk/integrators.hpp"
#include "lsrk/problems.hpp"
#include "lsrk/search.hpp"
#include "lsrk/semidisc.hpp"
#include "lsrk/stability.hpp"

using json = nlohmann::ordered_json;
using namespace lsrk;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct MethodFlags {
  std::string scheme;
  std::string coeff_file;
};

struct ProblemFlags {
  std::string problem = "advection2d";
  std::optional<double> t_end;
  std::optional<int> elements;
  std::optional<int> degree;
  std::optional<double> lambda;
  double perturb = 0.0;
  std::uint64_t grid_seed = 1;
};

struct ControlFlags {
  std::optional<double> tol;
  std::optional<double> atol;
  std::optional<double> rtol;
  std::vector<double> beta;
  std::optional<double> cfl;
  bool no_limiter = false;
};

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json jnum(double x) {
  if (std::isfinite(x)) return x;
  return num(x);
}

void add_method_flags(CLI::App* app, MethodFlags& m) {
  app->add_option("--scheme", m.scheme, "catalog name or alias (see `lsrk catalog`)");
  app->add_option("--coeff-file", m.coeff_file, "JSON coefficient file");
}

void add_problem_flags(CLI::App* app, ProblemFlags& p) {
  app->add_option("--problem", p.problem, "dahlquist, advection2d, vortex2d or source1d")
      ->capture_default_str();
  app->add_option("--t-end", p.t_end, "final time");
  app->add_option("--elements", p.elements, "elements per direction");
  app->add_option("--degree", p.degree, "polynomial degree");
  app->add_option("--lambda", p.lambda, "dahlquist eigenvalue");
  app->add_option("--perturb", p.perturb, "random interface displacement as a fraction of h")
      ->capture_default_str();
  app->add_option("--grid-seed", p.grid_seed, "seed of the perturbed grid")->capture_default_str();
}

void add_control_flags(CLI::App* app, ControlFlags& c) {
  app->add_option("--tol", c.tol, "atol = rtol (default 1e-5)");
  app->add_option("--atol", c.atol, "absolute tolerance");
  app->add_option("--rtol", c.rtol, "relative tolerance");
  app->add_option("--beta", c.beta, "PID gains b1,b2,b3 (default: tuned gains of the scheme)")
      ->delimiter(',')
      ->expected(1, 3);
  app->add_option("--cfl", c.cfl, "CFL number; selects CFL-based control");
  app->add_flag("--no-limiter", c.no_limiter, "disable the step size limiter");
}

Method resolve(const MethodFlags& m, std::string* label = nullptr) {
  if (m.scheme.empty() && m.coeff_file.empty()) throw UsageError("--scheme or --coeff-file is required");
  std::string warning;
  Method method = resolve_method(m.scheme, m.coeff_file, &warning);
  if (!warning.empty()) std::cerr << "warning: " << warning << '\n';
  if (label) *label = m.scheme.empty() ? method_name(method) : m.scheme;
  return method;
}

ProblemOverrides overrides_of(const ProblemFlags& p) {
  ProblemOverrides o;
  o.t_end = p.t_end;
  o.elements = p.elements;
  o.degree = p.degree;
  o.lambda = p.lambda;
  o.grid_perturbation = p.perturb;
  o.grid_seed = p.grid_seed;
  return o;
}

Gains gains_of(const ControlFlags& c, const MethodFlags& m, const Method& method) {
  if (c.beta.empty()) return default_gains(m.scheme.empty() ? method_name(method) : m.scheme);
  Gains g{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < c.beta.size(); ++i) g[i] = c.beta[i];
  return g;
}

ControllerConfig pid_of(const ControlFlags& c, const Gains& g, const Method& method, double tol) {
  ControllerConfig cfg;
  cfg.beta1 = g[0];
  cfg.beta2 = g[1];
  cfg.beta3 = g[2];
  cfg.atol = c.atol.value_or(tol);
  cfg.rtol = c.rtol.value_or(tol);
  cfg.k = method_orders(method).k();
  cfg.use_limiter = !c.no_limiter;
  cfg.validate();
  return cfg;
}

CflConfig cfl_of(double nu, const Problem& prob) {
  CflConfig cfg;
  cfg.nu = nu;
  cfg.sigma = cfl_sigma(prob.rhs->degree());
  cfg.validate();
  return cfg;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw UsageError("cannot open output file " + path);
  return file;
}

json report_json(const RunReport& r, const std::string& problem, const std::string& status) {
  json j;
  j["scheme"] = r.scheme;
  j["problem"] = problem;
  j["controller"] = r.controller;
  j["setting"] = jnum(r.setting);
  j["status"] = status;
  j["nfe"] = r.total_nfe();
  j["nfe_stepping"] = r.nfe;
  j["nfe_startup"] = r.nfe_startup;
  j["accepted"] = r.accepted;
  j["rejected"] = r.rejected;
  j["t_final"] = r.t_final;
  json err = json::array();
  for (double e : r.error) err.push_back(jnum(e));
  j["error"] = err;
  j["wall_time"] = r.wall_time;
  return j;
}

void write_history(const std::string& path, const RunReport& r) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot open history file " + path);
  f << "t,dt,w,accepted\n";
  for (const auto& s : r.history)
    f << num(s.t) << ',' << num(s.dt) << ',' << num(s.w) << ',' << (s.accepted ? 1 : 0) << '\n';
}

// ---------------------------------------------------------------------------

struct IntegrateCmd {
  MethodFlags m;
  ProblemFlags p;
  ControlFlags c;
  std::string out;
  std::string history;
};

int cmd_integrate(const IntegrateCmd& a) {
  std::string label;
  const Method method = resolve(a.m, &label);
  const Problem prob = make_problem(a.p.problem, overrides_of(a.p));
  IntegrateOptions opts;
  opts.record_history = !a.history.empty();
  Controller ctrl;
  if (a.c.cfl)
    ctrl = cfl_of(*a.c.cfl, prob);
  else
    ctrl = pid_of(a.c, gains_of(a.c, a.m, method), method, a.c.tol.value_or(1e-5));

  std::ofstream file;
  std::ostream& os = open_out(a.out, file);
  try {
    const RunReport r = integrate(method, *prob.rhs, ctrl, prob.t0, prob.t_end, prob.u0, opts);
    os << report_json(r, prob.name, "ok").dump(2) << '\n';
    if (opts.record_history) write_history(a.history, r);
    return 0;
  } catch (const IntegrationAborted& e) {
    json j = report_json(e.report(), prob.name, "aborted");
    j["message"] = e.what();
    os << j.dump(2) << '\n';
    if (opts.record_history) write_history(a.history, e.report());
    std::cerr << "integration aborted: " << e.what() << '\n';
    return 2;
  }
}

struct SweepCmd {
  MethodFlags m;
  ProblemFlags p;
  ControlFlags c;
  std::vector<double> tols;
  std::vector<double> cfls;
  std::string out;
};

int cmd_sweep(const SweepCmd& a) {
  if (a.tols.empty() == a.cfls.empty()) throw UsageError("give exactly one of --tols or --cfls");
  const Method method = resolve(a.m);
  const Problem prob = make_problem(a.p.problem, overrides_of(a.p));
  const Gains g = gains_of(a.c, a.m, method);
  std::ofstream file;
  std::ostream& os = open_out(a.out, file);
  const bool by_cfl = !a.cfls.empty();
  os << (by_cfl ? "cfl" : "tol") << ",nfe,rejected,error,status\n";
  int failures = 0;
  for (double setting : by_cfl ? a.cfls : a.tols) {
    Controller ctrl;
    if (by_cfl)
      ctrl = cfl_of(setting, prob);
    else
      ctrl = pid_of(a.c, g, method, setting);
    std::string status = "ok";
    RunReport r;
    try {
      r = integrate(method, *prob.rhs, ctrl, prob.t0, prob.t_end, prob.u0);
    } catch (const IntegrationAborted& e) {
      r = e.report();
      status = "aborted";
      ++failures;
    }
    double err = std::numeric_limits<double>::quiet_NaN();
    if (!r.error.empty()) err = r.error.front();
    os << num(setting) << ',' << r.total_nfe() << ',' << r.rejected << ',' << num(err) << ','
       << status << '\n';
  }
  if (failures > 0) std::cerr << failures << " sweep rows aborted\n";
  return 0;
}

struct StabilityCmd {
  MethodFlags m;
  int points = 512;
  bool scaled = false;
  std::vector<double> beta;
  bool control_map = false;
  int grid = 200;
  std::string out;
  std::string map_out;
};

int cmd_stability(const StabilityCmd& a) {
  std::string label;
  const Method method = resolve(a.m, &label);
  const StabilityPolynomials polys = stability_polynomials(method);
  const double scale = a.scaled ? 1.0 / polys.s_eff : 1.0;

  json summary;
  summary["scheme"] = method_name(method);
  summary["s_eff"] = polys.s_eff;
  summary["scaled"] = a.scaled;

  std::ofstream file;
  std::ostream& os = open_out(a.out, file);
  os << "curve,re,im,value\n";
  int status = 0;
  for (const auto& [curve, poly] : {std::pair{"main", &polys.R}, std::pair{"embedded", &polys.Rhat}}) {
    try {
      const BoundaryTrace tr = trace_boundary(*poly, a.points);
      double xmin = 0.0;
      for (std::size_t i = 0; i < tr.points.size(); ++i) {
        const cplx z = tr.points[i] * scale;
        xmin = std::min(xmin, z.real());
        os << curve << ',' << num(z.real()) << ',' << num(z.imag()) << ',' << num(tr.thetas[i]) << '\n';
      }
      summary[std::string(curve) + "_real_extent"] = xmin;
    } catch (const ContinuationError& e) {
      // grid contour fallback, flagged as unordered
      std::cerr << curve << " boundary continuation failed at theta " << e.theta() << ": " << e.what()
                << "; falling back to grid contouring\n";
      ComplexGrid g;
      g.re_lo = -12;
      g.re_hi = 2;
      g.im_lo = -8;
      g.im_hi = 8;
      for (const auto& z : contour_unit_modulus(*poly, g).points)
        os << curve << "-contour," << num(z.real() * scale) << ',' << num(z.imag() * scale) << ",nan\n";
      summary[std::string(curve) + "_trace"] = "contour fallback";
      status = 2;
    }
  }
  try {
    const Containment c = embedded_contains_main(polys);
    summary["embedded_contains_main"] = c.contained;
    summary["containment_violations"] = c.violations.size();
  } catch (const ContinuationError& e) {
    summary["embedded_contains_main"] = nullptr;
    status = 2;
  }

  if (!a.beta.empty()) {
    Gains g{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < a.beta.size(); ++i) g[i] = a.beta[i];
    const int k = method_orders(method).k();
    const ControlStabilityReport rep = control_stability_scan(polys, g, k, a.points);
    summary["beta"] = {g[0], g[1], g[2]};
    summary["k"] = k;
    summary["max_rho"] = rep.max_rho;
    summary["argmax"] = {rep.argmax.real() * scale, rep.argmax.imag() * scale};
    summary["control_stable"] = rep.stable;
    summary["samples"] = rep.samples.size();
    summary["degenerate_samples"] = rep.degenerate.size();
    if (a.control_map) {
      ComplexGrid grid = region_grid(polys.R, a.grid);
      const auto rows = control_stability_map(polys, g, k, grid);
      std::vector<GridValue> scaled_rows;
      for (const auto& r : rows) scaled_rows.push_back({r.z * scale, r.value});
      std::ofstream mf;
      std::ostream& ms = open_out(a.map_out.empty() ? "control_map.csv" : a.map_out, mf);
      write_csv(ms, scaled_rows);
      summary["control_map"] = a.map_out.empty() ? "control_map.csv" : a.map_out;
    }
  } else if (a.control_map) {
    throw UsageError("--control-map needs --beta");
  }
  std::cerr << summary.dump(2) << '\n';
  return status;
}

struct SearchCmd {
  MethodFlags m;
  std::vector<std::string> problems{"vortex2d", "source1d"};
  std::vector<double> tols;
  std::string policy = "min-max";
  std::size_t budget = 0;
  std::uint64_t seed = 1;
  std::vector<double> b1{0.10, 1.00, 0.01}, b2{-0.40, -0.05, 0.01}, b3{0.00, 0.10, 0.01};
  std::vector<std::vector<double>> include;
  std::optional<int> elements;
  std::string out;
  std::string summary;
};

GridRange range_of(const std::vector<double>& v, const char* flag) {
  if (v.size() != 3) throw UsageError(std::string(flag) + " expects lo,hi,step");
  return {v[0], v[1], v[2]};
}

int cmd_search(const SearchCmd& a) {
  const Method method = resolve(a.m);
  const Policy policy = parse_policy(a.policy);
  SearchSpace space;
  space.beta1 = range_of(a.b1, "--beta1-range");
  space.beta2 = range_of(a.b2, "--beta2-range");
  space.beta3 = range_of(a.b3, "--beta3-range");
  if (!a.tols.empty()) space.tolerances = a.tols;
  std::vector<SearchProblem> problems;
  ProblemOverrides o;
  o.elements = a.elements;
  for (const auto& p : a.problems) problems.push_back(make_search_problem(p, o));
  SearchOptions opts;
  opts.budget = a.budget;
  opts.seed = a.seed;
  for (const auto& g : a.include) {
    if (g.size() != 3) throw UsageError("--include expects b1,b2,b3");
    opts.include.push_back({g[0], g[1], g[2]});
  }

  const SearchResult res = run_search(method, problems, space, opts);
  for (const auto& l : res.log) std::cerr << l << '\n';

  std::ofstream file;
  std::ostream& os = open_out(a.out, file);
  os << "beta1,beta2,beta3,problem,tol,nfe,rejected,error,status\n";
  for (const auto& c : res.candidates)
    for (const auto& r : c.runs)
      os << num(c.beta[0]) << ',' << num(c.beta[1]) << ',' << num(c.beta[2]) << ',' << r.problem << ','
         << num(r.tol) << ',' << num(r.nfe) << ',' << r.rejected << ',' << num(r.error) << ','
         << (r.ok ? "ok" : "failed") << '\n';

  json s;
  s["scheme"] = res.scheme;
  s["grid_size"] = res.grid_size;
  s["stable_count"] = res.stable_count;
  s["indeterminate"] = res.indeterminate.size();
  s["evaluated"] = res.candidates.size();
  s["policy"] = std::string(to_string(policy));
  std::ofstream sf;
  std::ostream& ss = a.summary.empty() ? std::cerr : open_out(a.summary, sf);
  try {
    const auto ranked = recommend(res, policy);
    json top = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(ranked.size(), 10); ++i) {
      const auto& c = ranked[i];
      top.push_back({{"beta", {c.beta[0], c.beta[1], c.beta[2]}},
                     {"max", jnum(c.max)},
                     {"median", jnum(c.median)},
                     {"p95", jnum(c.p95)}});
    }
    s["recommended"] = top.front()["beta"];
    s["ranking"] = top;
    ss << s.dump(2) << '\n';
  } catch (const EmptyStableSetError& e) {
    s["recommended"] = nullptr;
    s["message"] = e.what();
    ss << s.dump(2) << '\n';
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

struct ExportCmd {
  MethodFlags m;
  std::string out;
};

int cmd_export(const ExportCmd& a) {
  const Method method = resolve(a.m);
  std::ofstream file;
  open_out(a.out, file) << export_coefficients(method);
  return 0;
}

int cmd_catalog(bool as_json) {
  json list = json::array();
  for (const auto& info : catalog_list()) {
    const Method m = catalog_get(info.name);
    const auto o = method_orders(m);
    const auto g = default_gains(info.name);
    list.push_back({{"name", info.name},
                    {"alias", info.alias},
                    {"q", o.q},
                    {"qhat", o.qhat},
                    {"stages", method_stages(m)},
                    {"fsal", method_fsal(m)},
                    {"gains", {g[0], g[1], g[2]}},
                    {"summary", info.summary}});
  }
  if (as_json) {
    std::cout << list.dump(2) << '\n';
    return 0;
  }
  for (const auto& e : list)
    std::printf("%-16s %-14s q=%d qhat=%d s=%-2d %s\n", e["name"].get<std::string>().c_str(),
                e["alias"].get<std::string>().c_str(), e["q"].get<int>(), e["qhat"].get<int>(),
                e["stages"].get<int>(), e["fsal"].get<bool>() ? "FSAL" : "");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embedded low-storage Runge-Kutta pairs with PID step size control"};
  app.set_config("--config", "", "TOML/INI file; keys mirror the flags, sections the subcommands");
  app.require_subcommand(1);

  IntegrateCmd integ;
  auto* si = app.add_subcommand("integrate", "run one integration and print a JSON report");
  add_method_flags(si, integ.m);
  add_problem_flags(si, integ.p);
  add_control_flags(si, integ.c);
  si->add_option("--out", integ.out, "JSON report path (default stdout)");
  si->add_option("--history", integ.history, "CSV of attempted steps");

  SweepCmd sweep;
  auto* ss = app.add_subcommand("sweep", "tolerance or CFL sweep, one CSV row per setting");
  add_method_flags(ss, sweep.m);
  add_problem_flags(ss, sweep.p);
  add_control_flags(ss, sweep.c);
  ss->add_option("--tols", sweep.tols, "tolerances")->delimiter(',');
  ss->add_option("--cfls", sweep.cfls, "CFL numbers")->delimiter(',');
  ss->add_option("--out", sweep.out, "CSV path (default stdout)");

  StabilityCmd stab;
  auto* st = app.add_subcommand("stability", "boundary traces, containment and control stability");
  add_method_flags(st, stab.m);
  st->add_option("--points", stab.points, "boundary samples")->capture_default_str();
  st->add_flag("--scaled", stab.scaled, "divide z by the effective stage count");
  st->add_option("--beta", stab.beta, "PID gains for the control stability scan")
      ->delimiter(',')
      ->expected(1, 3);
  st->add_flag("--control-map", stab.control_map, "write rho(J(z)) on a grid");
  st->add_option("--grid", stab.grid, "grid points per direction of the map")->capture_default_str();
  st->add_option("--out", stab.out, "boundary CSV path (default stdout)");
  st->add_option("--map-out", stab.map_out, "control map CSV path");

  SearchCmd search;
  auto* sr = app.add_subcommand("search", "grid search over PID gains");
  add_method_flags(sr, search.m);
  sr->add_option("--problems", search.problems, "problem suite")->delimiter(',');
  sr->add_option("--tol", search.tols, "tolerances (default 1e-8 ... 1e-1)")->delimiter(',');
  sr->add_option("--policy", search.policy, "min-max, min-median or min-p95")->capture_default_str();
  sr->add_option("--budget", search.budget, "cap on the number of integrations (0: none)");
  sr->add_option("--seed", search.seed, "seed of the budget subsample")->capture_default_str();
  sr->add_option("--beta1-range", search.b1, "lo,hi,step")->delimiter(',');
  sr->add_option("--beta2-range", search.b2, "lo,hi,step")->delimiter(',');
  sr->add_option("--beta3-range", search.b3, "lo,hi,step")->delimiter(',');
  sr->add_option("--include", search.include, "extra candidate b1,b2,b3 (repeatable)")->delimiter(',');
  sr->add_option("--elements", search.elements, "elements per direction for every problem");
  sr->add_option("--out", search.out, "per-run CSV path (default stdout)");
  sr->add_option("--summary", search.summary, "JSON summary path (default stderr)");

  ExportCmd exp;
  auto* se = app.add_subcommand("export", "write the JSON coefficient file of a method");
  add_method_flags(se, exp.m);
  se->add_option("--out", exp.out, "path (default stdout)");

  bool catalog_json = false;
  auto* sc = app.add_subcommand("catalog", "list the built-in methods");
  sc->add_flag("--json", catalog_json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (si->parsed()) return cmd_integrate(integ);
    if (ss->parsed()) return cmd_sweep(sweep);
    if (st->parsed()) return cmd_stability(stab);
    if (sr->parsed()) return cmd_search(search);
    if (se->parsed()) return cmd_export(exp);
    if (sc->parsed()) return cmd_catalog(catalog_json);
  } catch (const EmptyStableSetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const IntegrationAborted& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ContinuationError& e) {
    std::cerr << "error: " << e.what() << " (theta " << e.theta() << ")\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const CoefficientParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
