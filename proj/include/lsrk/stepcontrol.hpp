#pragma once

// Error-based PID step size control and CFL-based control.

#include <array>
#include <string>

#include "lsrk/ode.hpp"

namespace lsrk {

struct ControllerConfig {
  double beta1 = 0.6;
  double beta2 = -0.2;
  double beta3 = 0.0;
  double atol = 1e-5;
  double rtol = 1e-5;
  int k = 3;
  double accept_threshold = 0.81;
  double bounds_reject_factor = 0.25;
  bool use_limiter = true;

  /// Throws std::invalid_argument on out-of-range entries.
  void validate() const;
  std::string describe() const;
};

/// Errors below this are clamped before inversion.
inline constexpr double kMinError = 1e-10;

/// eps = {eps_{n+1}, eps_n, eps_{n-1}}, neutral (1) until filled.
struct ControllerState {
  std::array<double, 3> eps{1.0, 1.0, 1.0};
  double dt = 0.0;

  /// Shift in a new error: eps_{n+1} = 1 / max(w, kMinError).
  void push(double w);
};

/// Weighted RMS norm of u - uhat with weights atol + rtol max(|u|, |uhat|).
/// Returns +inf if any entry is NaN.
double error_norm(const State& u, const State& uhat, const ControllerConfig& cfg);
/// Same norm, given u and the difference u - uhat.
double error_norm_from_diff(const State& u, const State& diff, const ControllerConfig& cfg);

/// x -> 1 + atan(x - 1).
double limiter(double x);

struct Proposal {
  double dt_next;
  double factor;
};
Proposal pid_propose(const ControllerState& state, const ControllerConfig& cfg);

struct Decision {
  bool accept;
  double dt;  // next step on accept, retry step on reject
};
Decision accept_or_reject(double factor, bool admissible, double dt_current, double dt_next,
                          const ControllerConfig& cfg);

/// Starting step from the standard two-evaluation recipe. `horizon` is
/// t_end - t0 and sets the fallback when the Euler probe is inadmissible.
/// `nfe` (optional) receives the number of right-hand side calls made.
double initial_step(const Semidiscretization& rhs, double t0, const State& u0,
                    const ControllerConfig& cfg, int q, double horizon, int* nfe = nullptr);

struct CflConfig {
  double nu = 1.0;
  double sigma = 1.0;
  void validate() const;
};

/// dt = nu * sigma * min_i 1 / sum_j (lambda_j / dx_j).
double cfl_dt(const Semidiscretization& semi, const State& u, const CflConfig& cfg);

}  // namespace lsrk
