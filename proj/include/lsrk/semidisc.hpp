#pragma once

// Nodal discontinuous Galerkin spectral element (DGSEM) discretizations on
// periodic Cartesian grids in one and two space dimensions.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lsrk/ode.hpp"

namespace lsrk {

/// Legendre-Gauss-Lobatto nodes, weights and differentiation matrix on [-1, 1].
struct LglOperator {
  int p = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> D;  // row-major (p+1) x (p+1)

  static LglOperator make(int p);
  std::size_t n() const { return nodes.size(); }
  double d(std::size_t i, std::size_t j) const { return D[i * n() + j]; }

  /// Lagrange basis values l_j(x) at a point.
  std::vector<double> basis_at(double x) const;
};

/// Legendre polynomial P_n and its derivative at x.
std::pair<double, double> legendre(int n, double x);

/// Periodic tensor-product grid. Element interfaces are stored explicitly so
/// that rectilinear grids with perturbed interfaces are also representable.
struct Grid {
  int dim = 1;
  std::array<int, 2> elements{1, 1};
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<std::vector<double>, 2> breaks;

  static Grid uniform(int dim, std::array<int, 2> elements, std::array<double, 2> lo,
                      std::array<double, 2> hi);
  /// Interior interfaces moved by uniform random offsets of at most
  /// amplitude * h (amplitude < 0.5).
  static Grid perturbed(int dim, std::array<int, 2> elements, std::array<double, 2> lo,
                        std::array<double, 2> hi, double amplitude, std::uint64_t seed);

  void validate() const;
  int num_elements() const { return dim == 1 ? elements[0] : elements[0] * elements[1]; }
  double width(int d, int e) const { return breaks[d][e + 1] - breaks[d][e]; }
  double length(int d) const { return hi[d] - lo[d]; }
  bool is_uniform(double tol = 1e-12) const;
};

/// Pointwise function of (t, x) writing num_variables values.
using FieldFunction = std::function<void(double t, const double* x, double* out)>;

/// Layout: u[((e * nodes_per_element + node) * nv) + v], element e = ex + Kx ey,
/// node = i + (p+1) j with i along x.
class DgSemidiscretization : public Semidiscretization {
 public:
  DgSemidiscretization(Grid grid, int p, std::size_t nv);

  std::size_t size() const override { return size_; }
  int degree() const override { return op_.p; }
  std::size_t num_variables() const override { return nv_; }
  const Grid& grid() const { return grid_; }
  const LglOperator& op() const { return op_; }
  std::size_t nodes_per_element() const { return npe_; }

  /// Coordinates of every node, interleaved (x[, y]).
  const std::vector<double>& node_coordinates() const { return coords_; }

  /// Nodal interpolant of a field.
  State interpolate(const FieldFunction& f, double t) const;

  /// Quadrature integral of each variable on the solution nodes.
  std::vector<double> integrals(const State& u) const;

  /// Per-variable L2 norm of u - f(t, .) by element-wise LGL quadrature on an
  /// oversampled node set of 2p + 3 points per direction.
  std::vector<double> l2_error(const State& u, const FieldFunction& f, double t) const;

  void set_exact(FieldFunction f) { exact_ = std::move(f); }
  bool has_exact() const override { return static_cast<bool>(exact_); }
  State exact(double t) const override;
  std::vector<double> error(double t, const State& u) const override;

 protected:
  Grid grid_;
  LglOperator op_;
  std::size_t nv_;
  std::size_t npe_;
  std::size_t size_;
  std::vector<double> coords_;
  FieldFunction exact_;
};

/// Linear advection u_t + a . grad u = 0 with full upwind interface flux.
class AdvectionDg : public DgSemidiscretization {
 public:
  AdvectionDg(Grid grid, int p, std::array<double, 2> a);
  void rhs(double t, const State& u, State& du) const override;
  double characteristic_time(const State& u) const override;
  const std::array<double, 2>& velocity() const { return a_; }

 private:
  std::array<double, 2> a_;
};

inline constexpr double kGamma = 1.4;

/// Compressible Euler equations with local Lax-Friedrichs interface flux.
/// Variables per node: rho, rho v (dim entries), rho e.
class EulerDg : public DgSemidiscretization {
 public:
  /// Optional source writes dim+2 values at (t, x).
  EulerDg(Grid grid, int p, FieldFunction source = {});
  void rhs(double t, const State& u, State& du) const override;
  bool admissible(const State& u) const override;
  double characteristic_time(const State& u) const override;

  static double pressure(const double* u, int dim);
  /// |v_d| + c for each direction; the state must be admissible.
  static double max_speed(const double* u, int dim, int d);

 private:
  FieldFunction source_;
};

/// Dense matrix of a linear semidiscretization, assembled column by column
/// from rhs(t, e_j). Row-major size() x size().
std::vector<double> assemble_linear_operator(const Semidiscretization& semi, double t = 0.0);

/// Eigenvalues of a dense row-major square matrix.
std::vector<std::complex<double>> dense_eigenvalues(const std::vector<double>& A, std::size_t n);

/// CFL normalization for degree p: sigma = 2 / max |Re lambda| of the periodic
/// 1D upwind advection operator with dx = 1, a = 1. Cached per degree.
double cfl_sigma(int p);

}  // namespace lsrk
