#include "lsrk/problems.hpp"

#include <cmath>

namespace lsrk {

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"dahlquist", "advection2d", "vortex2d", "source1d"};
  return names;
}

double vortex_temperature(const VortexParams& vp, double r) {
  const double g = kGamma;
  return vp.T_inf - (g - 1.0) * vp.mach * vp.mach * vp.beta * vp.beta / (8.0 * g * M_PI * M_PI) *
                        std::exp(1.0 - r * r);
}

double vortex_tangential_velocity(const VortexParams& vp, double r) {
  return r * vp.beta / (2.0 * M_PI) * std::exp(0.5 * (1.0 - r * r));
}

void vortex2d_exact(const VortexParams& vp, double t, const double* x, double* u) {
  const double L = vp.hi - vp.lo;
  const double vinf = vp.mach / std::sqrt(2.0);
  double d[2];
  for (int k = 0; k < 2; ++k) {
    double c = vp.center[k] + vinf * t;
    double dk = x[k] - c;
    dk -= L * std::round(dk / L);
    d[k] = dk;
  }
  const double r2 = d[0] * d[0] + d[1] * d[1];
  const double T = vortex_temperature(vp, std::sqrt(r2));
  // v_t e_theta = beta/(2 pi) exp((1 - r^2)/2) (-dy, dx)
  const double amp = vp.beta / (2.0 * M_PI) * std::exp(0.5 * (1.0 - r2));
  const double vx = vinf - amp * d[1];
  const double vy = vinf + amp * d[0];
  const double rho = std::pow(T, 1.0 / (kGamma - 1.0));
  // pressure scaled so that the vortex is an exact steady Euler solution
  const double p = rho * T / (vp.mach * vp.mach);
  u[0] = rho;
  u[1] = rho * vx;
  u[2] = rho * vy;
  u[3] = p / (kGamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy);
}

void source1d_exact(const SourceParams& sp, double t, const double* x, double* u) {
  const double rho = 1.5 + std::sin(M_PI * (x[0] - t));
  const double p = 1.0 + sp.amplitude * (1.0 + std::sin(sp.omega * t));
  u[0] = rho;
  u[1] = rho;
  u[2] = p / (kGamma - 1.0) + 0.5 * rho;
}

void source1d_source(const SourceParams& sp, double t, const double*, double* s) {
  s[0] = 0.0;
  s[1] = 0.0;
  s[2] = sp.amplitude * sp.omega * std::cos(sp.omega * t) / (kGamma - 1.0);
}

namespace {

Grid make_grid(int dim, int K, double lo, double hi, const ProblemOverrides& o) {
  if (o.grid_perturbation > 0.0)
    return Grid::perturbed(dim, {K, K}, {lo, lo}, {hi, hi}, o.grid_perturbation, o.grid_seed);
  return Grid::uniform(dim, {K, K}, {lo, lo}, {hi, hi});
}

}  // namespace

Problem make_problem(std::string_view name, const ProblemOverrides& o) {
  Problem pb;
  pb.name = std::string(name);
  if (name == "dahlquist") {
    const double lambda = o.lambda.value_or(-1.0);
    pb.rhs = std::make_shared<FunctionOde>(
        1, [lambda](double, const State& u, State& du) { du.assign(1, lambda * u[0]); },
        [lambda](double t) { return State{std::exp(lambda * t)}; });
    pb.u0 = {1.0};
    pb.t_end = o.t_end.value_or(1.0);
  } else if (name == "advection2d") {
    auto adv = std::make_shared<AdvectionDg>(make_grid(2, o.elements.value_or(8), -5.0, 5.0, o),
                                             o.degree.value_or(4), std::array<double, 2>{1.0, 1.0});
    auto field = [](double t, const double* x, double* u) {
      u[0] = std::sin(M_PI * (x[0] - t) / 5.0) * std::sin(M_PI * (x[1] - t) / 5.0);
    };
    adv->set_exact(field);
    pb.u0 = adv->interpolate(field, 0.0);
    pb.rhs = adv;
    pb.t_end = o.t_end.value_or(100.0);
  } else if (name == "vortex2d") {
    auto eul = std::make_shared<EulerDg>(make_grid(2, o.elements.value_or(20), -5.0, 5.0, o),
                                         o.degree.value_or(2));
    VortexParams vp;
    auto field = [vp](double t, const double* x, double* u) { vortex2d_exact(vp, t, x, u); };
    eul->set_exact(field);
    pb.u0 = eul->interpolate(field, 0.0);
    pb.rhs = eul;
    pb.t_end = o.t_end.value_or(20.0);
  } else if (name == "source1d") {
    SourceParams sp;
    auto eul = std::make_shared<EulerDg>(
        make_grid(1, o.elements.value_or(20), -1.0, 1.0, o), o.degree.value_or(2),
        [sp](double t, const double* x, double* s) { source1d_source(sp, t, x, s); });
    auto field = [sp](double t, const double* x, double* u) { source1d_exact(sp, t, x, u); };
    eul->set_exact(field);
    pb.u0 = eul->interpolate(field, 0.0);
    pb.rhs = eul;
    pb.t_end = o.t_end.value_or(20.0);
  } else {
    std::string msg = "unknown problem '" + std::string(name) + "'; valid:";
    for (const auto& n : problem_names()) msg += " " + n;
    throw UnknownProblemError(msg);
  }
  if (!(pb.t_end > pb.t0)) throw std::invalid_argument("t_end must be positive");
  return pb;
}

}  // namespace lsrk
