#include "lsrk/stepcontrol.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace lsrk {

void ControllerConfig::validate() const {
  if (!(atol > 0.0)) throw std::invalid_argument("atol must be positive");
  if (!(rtol >= 0.0)) throw std::invalid_argument("rtol must be nonnegative");
  if (!(accept_threshold > 0.0 && accept_threshold < 1.0))
    throw std::invalid_argument("accept_threshold must lie in (0, 1)");
  if (!(bounds_reject_factor > 0.0 && bounds_reject_factor < 1.0))
    throw std::invalid_argument("bounds_reject_factor must lie in (0, 1)");
  if (k < 2) throw std::invalid_argument("controller exponent k must be at least 2");
  if (!std::isfinite(beta1) || !std::isfinite(beta2) || !std::isfinite(beta3))
    throw std::invalid_argument("controller gains must be finite");
}

std::string ControllerConfig::describe() const {
  std::ostringstream os;
  os << "PID(" << beta1 << "," << beta2 << "," << beta3 << ")";
  return os.str();
}

void ControllerState::push(double w) {
  eps[2] = eps[1];
  eps[1] = eps[0];
  eps[0] = 1.0 / std::max(w, kMinError);
}

double error_norm(const State& u, const State& uhat, const ControllerConfig& cfg) {
  if (u.size() != uhat.size()) throw std::invalid_argument("error_norm: size mismatch");
  if (u.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (std::isnan(u[i]) || std::isnan(uhat[i])) return std::numeric_limits<double>::infinity();
    const double sc = cfg.atol + cfg.rtol * std::max(std::abs(u[i]), std::abs(uhat[i]));
    const double r = (u[i] - uhat[i]) / sc;
    sum += r * r;
  }
  const double w = std::sqrt(sum / static_cast<double>(u.size()));
  return std::isnan(w) ? std::numeric_limits<double>::infinity() : w;
}

double error_norm_from_diff(const State& u, const State& diff, const ControllerConfig& cfg) {
  if (u.size() != diff.size()) throw std::invalid_argument("error_norm: size mismatch");
  if (u.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (std::isnan(u[i]) || std::isnan(diff[i])) return std::numeric_limits<double>::infinity();
    const double uhat = u[i] - diff[i];
    const double sc = cfg.atol + cfg.rtol * std::max(std::abs(u[i]), std::abs(uhat));
    const double r = diff[i] / sc;
    sum += r * r;
  }
  const double w = std::sqrt(sum / static_cast<double>(u.size()));
  return std::isnan(w) ? std::numeric_limits<double>::infinity() : w;
}

double limiter(double x) { return 1.0 + std::atan(x - 1.0); }

Proposal pid_propose(const ControllerState& state, const ControllerConfig& cfg) {
  const double k = static_cast<double>(cfg.k);
  double factor = std::pow(state.eps[0], cfg.beta1 / k) * std::pow(state.eps[1], cfg.beta2 / k) *
                  std::pow(state.eps[2], cfg.beta3 / k);
  if (cfg.use_limiter) factor = limiter(factor);
  return {factor * state.dt, factor};
}

Decision accept_or_reject(double factor, bool admissible, double dt_current, double dt_next,
                          const ControllerConfig& cfg) {
  if (!admissible) return {false, dt_current * cfg.bounds_reject_factor};
  if (factor >= cfg.accept_threshold) return {true, dt_next};
  return {false, dt_next};
}

namespace {

double rms_scaled(const State& v, const State& u0, const ControllerConfig& cfg) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = v[i] / (cfg.atol + cfg.rtol * std::abs(u0[i]));
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(v.size()));
}

}  // namespace

double initial_step(const Semidiscretization& rhs, double t0, const State& u0,
                    const ControllerConfig& cfg, int q, double horizon, int* nfe) {
  const double fallback = 1e-6 * horizon;
  int calls = 0;
  auto finish = [&](double dt) {
    if (nfe) *nfe = calls;
    return std::min(dt, horizon);
  };
  const std::size_t n = u0.size();
  State f0(n), f1(n), u1(n);
  try {
    ++calls;
    rhs.rhs(t0, u0, f0);
  } catch (const InadmissibleState&) {
    return finish(fallback);
  }
  const double d0 = rms_scaled(u0, u0, cfg);
  const double d1 = rms_scaled(f0, u0, cfg);
  const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  for (std::size_t i = 0; i < n; ++i) u1[i] = u0[i] + h0 * f0[i];
  try {
    if (!rhs.admissible(u1)) return finish(fallback);
    ++calls;
    rhs.rhs(t0 + h0, u1, f1);
  } catch (const InadmissibleState&) {
    return finish(fallback);
  }
  for (std::size_t i = 0; i < n; ++i) f1[i] -= f0[i];
  const double d2 = rms_scaled(f1, u0, cfg) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                  : std::pow(0.01 / dmax, 1.0 / static_cast<double>(q + 1));
  const double dt = std::min(100.0 * h0, h1);
  if (!std::isfinite(dt) || dt <= 0.0) return finish(fallback);
  return finish(dt);
}

void CflConfig::validate() const {
  if (!(nu > 0.0)) throw std::invalid_argument("CFL number must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("CFL normalization sigma must be positive");
}

double cfl_dt(const Semidiscretization& semi, const State& u, const CflConfig& cfg) {
  cfg.validate();
  const double tau = semi.characteristic_time(u);
  if (!std::isfinite(tau) || tau <= 0.0)
    throw std::domain_error("CFL control undefined: zero wave speed everywhere");
  return cfg.nu * cfg.sigma * tau;
}

}  // namespace lsrk
