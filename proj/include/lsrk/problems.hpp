#pragma once

// Ready-to-run test problems.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsrk/ode.hpp"
#include "lsrk/semidisc.hpp"

namespace lsrk {

struct ProblemOverrides {
  std::optional<int> elements;  // per direction
  std::optional<int> degree;
  std::optional<double> t_end;
  std::optional<double> lambda;  // dahlquist only
  /// Interior element interfaces moved by up to this fraction of h.
  double grid_perturbation = 0.0;
  std::uint64_t grid_seed = 1;
};

struct Problem {
  std::string name;
  std::shared_ptr<const Semidiscretization> rhs;
  State u0;
  double t0 = 0.0;
  double t_end = 1.0;

  bool has_exact() const { return rhs->has_exact(); }
  bool admissible(const State& u) const { return rhs->admissible(u); }
};

class UnknownProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// dahlquist, advection2d, vortex2d or source1d.
Problem make_problem(std::string_view name, const ProblemOverrides& overrides = {});
const std::vector<std::string>& problem_names();

struct VortexParams {
  double mach = 0.5;
  double beta = 5.0;
  double T_inf = 1.0;
  double lo = -5.0;
  double hi = 5.0;
  std::array<double, 2> center{0.0, 0.0};
};

/// Planar isentropic vortex advected with velocity mach (1, 1) / sqrt(2); the
/// distance to the centre uses the nearest periodic image. Writes rho, rho v,
/// rho e.
void vortex2d_exact(const VortexParams& vp, double t, const double* x, double* u);
double vortex_temperature(const VortexParams& vp, double r);
double vortex_tangential_velocity(const VortexParams& vp, double r);

struct SourceParams {
  double amplitude = 50.0;
  double omega = M_PI / 5.0;
};
void source1d_exact(const SourceParams& sp, double t, const double* x, double* u);
void source1d_source(const SourceParams& sp, double t, const double* x, double* s);

}  // namespace lsrk
