#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lsrk/coefficients.hpp"
#include "lsrk/integrators.hpp"
#include "lsrk/problems.hpp"
#include "lsrk/search.hpp"
#include "lsrk/semidisc.hpp"
#include "lsrk/stability.hpp"
#include "lsrk/stepcontrol.hpp"

namespace py = pybind11;
using namespace lsrk;

namespace {

// Wraps a Python callable f(t, u) -> du as a right-hand side.
class PyOde : public Semidiscretization {
 public:
  PyOde(std::size_t n, std::function<std::vector<double>(double, const std::vector<double>&)> f)
      : n_(n), f_(std::move(f)) {}
  std::size_t size() const override { return n_; }
  void rhs(double t, const State& u, State& du) const override {
    py::gil_scoped_acquire gil;
    du = f_(t, u);
    if (du.size() != n_) throw std::invalid_argument("right-hand side returned the wrong length");
  }

 private:
  std::size_t n_;
  std::function<std::vector<double>(double, const std::vector<double>&)> f_;
};

Method method_of(const std::string& scheme, const std::string& coeff_file) {
  return resolve_method(scheme, coeff_file);
}

Controller controller_of(const Method& m, std::optional<double> tol, std::optional<Gains> beta,
                         std::optional<double> cfl, const Semidiscretization& rhs) {
  if (cfl) {
    CflConfig c;
    c.nu = *cfl;
    c.sigma = rhs.degree() > 0 ? cfl_sigma(rhs.degree()) : 1.0;
    return c;
  }
  ControllerConfig c;
  const Gains g = beta ? *beta : default_gains(method_name(m));
  c.beta1 = g[0];
  c.beta2 = g[1];
  c.beta3 = g[2];
  c.atol = c.rtol = tol.value_or(1e-5);
  c.k = method_orders(m).k();
  return c;
}

py::dict report_dict(const RunReport& r) {
  py::dict d;
  d["scheme"] = r.scheme;
  d["controller"] = r.controller;
  d["setting"] = r.setting;
  d["nfe"] = r.total_nfe();
  d["nfe_startup"] = r.nfe_startup;
  d["accepted"] = r.accepted;
  d["rejected"] = r.rejected;
  d["t_final"] = r.t_final;
  d["u_final"] = r.u_final;
  d["error"] = r.error;
  d["wall_time"] = r.wall_time;
  py::list hist;
  for (const auto& h : r.history) hist.append(py::make_tuple(h.t, h.dt, h.w, h.accepted));
  d["history"] = hist;
  return d;
}

py::dict integrate_problem(const std::string& scheme, const std::string& problem, std::optional<double> tol,
                           std::optional<Gains> beta, std::optional<double> cfl, std::optional<int> elements,
                           std::optional<int> degree, std::optional<double> t_end, std::optional<double> lambda,
                           double perturb, const std::string& coeff_file, bool history) {
  const Method m = method_of(scheme, coeff_file);
  ProblemOverrides o;
  o.elements = elements;
  o.degree = degree;
  o.t_end = t_end;
  o.lambda = lambda;
  o.grid_perturbation = perturb;
  const Problem p = make_problem(problem, o);
  IntegrateOptions io;
  io.record_history = history;
  RunReport r;
  {
    py::gil_scoped_release nogil;
    r = integrate(m, *p.rhs, controller_of(m, tol, beta, cfl, *p.rhs), p.t0, p.t_end, p.u0, io);
  }
  return report_dict(r);
}

py::dict integrate_callable(const std::string& scheme, py::function f, double t0, double t_end,
                            std::vector<double> u0, double tol, std::optional<Gains> beta) {
  const Method m = method_of(scheme, "");
  const auto fn = f.cast<std::function<std::vector<double>(double, const std::vector<double>&)>>();
  PyOde ode(u0.size(), fn);
  RunReport r;
  {
    py::gil_scoped_release nogil;
    r = integrate(m, ode, controller_of(m, tol, beta, std::nullopt, ode), t0, t_end, u0);
  }
  return report_dict(r);
}

py::dict stability(const std::string& scheme, std::optional<Gains> beta, int points) {
  const Method m = method_of(scheme, "");
  const auto polys = stability_polynomials(m);
  py::dict d;
  d["R"] = polys.R;
  d["Rhat"] = polys.Rhat;
  d["E"] = polys.E;
  d["s_eff"] = polys.s_eff;
  d["boundary"] = trace_boundary(polys.R, points).points;
  d["embedded_contains_main"] = embedded_contains_main(polys).contained;
  if (beta) {
    const auto rep = control_stability_scan(polys, *beta, method_orders(m).k(), points);
    d["max_rho"] = rep.max_rho;
    d["argmax"] = rep.argmax;
    d["control_stable"] = rep.stable;
    d["degenerate"] = rep.degenerate.size();
  }
  return d;
}

py::dict search(const std::string& scheme, std::vector<std::string> problems, std::vector<double> tols,
                std::optional<std::array<double, 3>> b1, std::optional<std::array<double, 3>> b2,
                std::optional<std::array<double, 3>> b3, std::size_t budget, std::uint64_t seed,
                std::optional<int> elements, const std::string& policy) {
  const Method m = method_of(scheme, "");
  SearchSpace space;
  if (!tols.empty()) space.tolerances = tols;
  if (b1) space.beta1 = {(*b1)[0], (*b1)[1], (*b1)[2]};
  if (b2) space.beta2 = {(*b2)[0], (*b2)[1], (*b2)[2]};
  if (b3) space.beta3 = {(*b3)[0], (*b3)[1], (*b3)[2]};
  std::vector<SearchProblem> suite;
  for (const auto& p : problems) suite.push_back(make_search_problem(p, {.elements = elements}));
  SearchOptions o;
  o.budget = budget;
  o.seed = seed;
  SearchResult res;
  {
    py::gil_scoped_release nogil;
    res = run_search(m, suite, space, o);
  }
  py::dict d;
  d["grid_size"] = res.grid_size;
  d["stable_count"] = res.stable_count;
  py::list cands;
  for (const auto& c : res.candidates) {
    py::dict e;
    e["beta"] = c.beta;
    e["max"] = c.max;
    e["median"] = c.median;
    e["p95"] = c.p95;
    cands.append(e);
  }
  d["candidates"] = cands;
  d["recommended"] = recommend(res, parse_policy(policy)).front().beta;
  d["log"] = res.log;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lsrk, m) {
  m.doc() = "Embedded low-storage Runge-Kutta pairs with PID step size control";

  py::register_exception<EmptyStableSetError>(m, "EmptyStableSetError");
  py::register_exception<IntegrationAborted>(m, "IntegrationAborted");

  m.def("catalog", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& c : catalog_list()) out.emplace_back(c.name, c.alias);
    return out;
  });
  m.def("default_gains", [](const std::string& scheme) { return default_gains(method_name(catalog_get(scheme))); });
  m.def("orders", [](const std::string& scheme) {
    const auto o = method_orders(catalog_get(scheme));
    return std::make_pair(o.q, o.qhat);
  });
  m.def("butcher", [](const std::string& scheme) {
    const ButcherPair p = to_butcher(catalog_get(scheme));
    py::dict d;
    d["s"] = p.s;
    d["A"] = p.A;
    d["b"] = p.b;
    d["c"] = p.c;
    d["bhat"] = p.bhat;
    return d;
  });
  m.def("max_order_residual", [](const std::string& scheme) {
    const Method mm = catalog_get(scheme);
    const ButcherPair p = to_butcher(mm);
    const auto o = method_orders(mm);
    return std::max(max_order_residual(p, o.q, false), max_order_residual(p, o.qhat, true));
  });
  m.def("export_coefficients", [](const std::string& scheme) { return export_coefficients(catalog_get(scheme)); });
  m.def("parse_coefficients", [](const std::string& text) { return method_name(parse_coefficients(text)); });

  m.def("limiter", &limiter);
  m.def(
      "pid_factor",
      [](std::array<double, 3> eps, Gains beta, int k, bool use_limiter) {
        ControllerConfig c;
        c.beta1 = beta[0];
        c.beta2 = beta[1];
        c.beta3 = beta[2];
        c.k = k;
        c.use_limiter = use_limiter;
        ControllerState st;
        st.eps = eps;
        st.dt = 1.0;
        return pid_propose(st, c).factor;
      },
      py::arg("eps"), py::arg("beta"), py::arg("k"), py::arg("use_limiter") = true);

  m.def("integrate", &integrate_problem, py::arg("scheme"), py::arg("problem"), py::arg("tol") = py::none(),
        py::arg("beta") = py::none(), py::arg("cfl") = py::none(), py::arg("elements") = py::none(),
        py::arg("degree") = py::none(), py::arg("t_end") = py::none(), py::arg("lam") = py::none(),
        py::arg("perturb") = 0.0, py::arg("coeff_file") = "", py::arg("history") = false);
  m.def("integrate_ode", &integrate_callable, py::arg("scheme"), py::arg("f"), py::arg("t0"), py::arg("t_end"),
        py::arg("u0"), py::arg("tol") = 1e-6, py::arg("beta") = py::none());
  m.def("stability", &stability, py::arg("scheme"), py::arg("beta") = py::none(), py::arg("points") = 512);
  m.def("search", &search, py::arg("scheme"), py::arg("problems"), py::arg("tols") = std::vector<double>{},
        py::arg("beta1") = py::none(), py::arg("beta2") = py::none(), py::arg("beta3") = py::none(),
        py::arg("budget") = 0, py::arg("seed") = 1, py::arg("elements") = py::none(),
        py::arg("policy") = "min-max");
  m.def("problems", &problem_names);
}
