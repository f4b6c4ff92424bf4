#pragma once

// Right-hand sides u' = f(t, u) seen by the integrators.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsrk {

using State = std::vector<double>;

/// Thrown by a right-hand side evaluated at a physically inadmissible state
/// (for Euler: nonpositive density or pressure). Steppers turn it into a
/// rejected step.
class InadmissibleState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A semidiscretized PDE or plain ODE system. rhs() must be a pure function of
/// (t, u) so that several integrations can share one instance.
class Semidiscretization {
 public:
  virtual ~Semidiscretization() = default;

  virtual std::size_t size() const = 0;
  virtual void rhs(double t, const State& u, State& du) const = 0;

  /// Physical-bounds predicate; the default only requires finite entries.
  virtual bool admissible(const State& u) const;

  /// min over nodes of 1 / sum_j (lambda_j / dx_j), the time scale used by the
  /// CFL controller. Throws std::logic_error when the system has no mesh.
  virtual double characteristic_time(const State& u) const;

  /// Polynomial degree of the spatial discretization (0 for plain ODEs).
  virtual int degree() const { return 0; }
  virtual std::size_t num_variables() const { return 1; }

  virtual bool has_exact() const { return false; }
  virtual State exact(double t) const;

  /// Per-variable error against exact(t). Plain ODEs report the max-norm;
  /// DG discretizations report the quadrature L2 norm.
  virtual std::vector<double> error(double t, const State& u) const;
};

/// Adapter for a user-supplied function.
class FunctionOde : public Semidiscretization {
 public:
  using Rhs = std::function<void(double, const State&, State&)>;
  using Exact = std::function<State(double)>;

  FunctionOde(std::size_t n, Rhs f, Exact exact = {}) : n_(n), f_(std::move(f)), exact_(std::move(exact)) {}

  std::size_t size() const override { return n_; }
  void rhs(double t, const State& u, State& du) const override { f_(t, u, du); }
  bool has_exact() const override { return static_cast<bool>(exact_); }
  State exact(double t) const override;

 private:
  std::size_t n_;
  Rhs f_;
  Exact exact_;
};

}  // namespace lsrk
