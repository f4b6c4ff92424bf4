#include "lsrk/ode.hpp"

#include <algorithm>
#include <cmath>

namespace lsrk {

bool Semidiscretization::admissible(const State& u) const {
  return std::all_of(u.begin(), u.end(), [](double x) { return std::isfinite(x); });
}

double Semidiscretization::characteristic_time(const State&) const {
  throw std::logic_error("CFL control needs a mesh-based semidiscretization");
}

State Semidiscretization::exact(double) const {
  throw std::logic_error("no exact solution available");
}

std::vector<double> Semidiscretization::error(double t, const State& u) const {
  const State ref = exact(t);
  const std::size_t nv = num_variables();
  std::vector<double> err(nv, 0.0);
  for (std::size_t i = 0; i < u.size(); ++i)
    err[i % nv] = std::max(err[i % nv], std::abs(u[i] - ref[i]));
  return err;
}

State FunctionOde::exact(double t) const {
  if (!exact_) return Semidiscretization::exact(t);
  return exact_(t);
}

}  // namespace lsrk
