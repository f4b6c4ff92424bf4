#pragma once

// Linear stability of embedded pairs: stability polynomials, boundary tracing,
// region containment and step size control stability of PID controllers.

#include <array>
#include <complex>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsrk/coefficients.hpp"

namespace lsrk {

using cplx = std::complex<double>;
/// Real polynomial, ascending coefficients.
using Poly = std::vector<double>;

cplx poly_eval(const Poly& p, cplx z);
cplx poly_deriv_eval(const Poly& p, cplx z);
/// z p'(z) / p(z).
cplx log_derivative(const Poly& p, cplx z);

struct StabilityPolynomials {
  Poly R;     // main method
  Poly Rhat;  // embedded method (extended tableau for FSAL pairs)
  Poly E;     // Rhat - R
  int s_eff = 0;
  int q = 0;
  int qhat = 0;
};

StabilityPolynomials stability_polynomials(const ButcherPair& pair);
StabilityPolynomials stability_polynomials(const Method& m);

struct BoundaryTrace {
  std::vector<cplx> points;
  std::vector<double> thetas;  // R(points[i]) = exp(i thetas[i])
};

class ContinuationError : public std::runtime_error {
 public:
  ContinuationError(const std::string& what, double theta)
      : std::runtime_error(what), theta_(theta) {}
  double theta() const noexcept { return theta_; }

 private:
  double theta_;
};

/// Dense continuation path of R(z) = exp(i theta) starting from z = 0 at
/// theta = 0 and ending when it returns to the origin. theta runs over
/// [0, 2 pi m], m being the winding of R along the boundary.
BoundaryTrace continue_boundary(const Poly& R);

/// n_points samples of the branch through the origin, equispaced in theta and
/// polished to |R(z) - exp(i theta)| <= 1e-10. Throws ContinuationError.
BoundaryTrace trace_boundary(const Poly& R, int n_points);

struct ComplexGrid {
  double re_lo = -1, re_hi = 1, im_lo = -1, im_hi = 1;
  int nre = 400, nim = 400;
  cplx at(int i, int j) const;
};

/// Unordered points with |R| = 1 found by bisection on the grid edges.
/// Fallback when continuation fails.
BoundaryTrace contour_unit_modulus(const Poly& R, const ComplexGrid& grid);

/// Bounding box of the traced main boundary, padded by `pad` of its size.
ComplexGrid region_grid(const Poly& R, int n = 400, double pad = 0.1);

struct Containment {
  bool contained = true;
  std::vector<cplx> violations;
  long checked = 0;  // grid points inside the inner region
};

/// Every grid point with |inner(z)| <= 1 must satisfy |outer(z)| <= 1 + 1e-12.
Containment contains_region(const Poly& outer, const Poly& inner, const ComplexGrid& grid);
/// Grid mask of the region enclosed by the boundary branch through the origin
/// (even-odd rule per grid row), indexed j * nre + i.
std::vector<char> inside_origin_component(const Poly& R, const ComplexGrid& grid);
/// As contains_region, with the inner region restricted to its component
/// containing the origin. Islands of |inner| <= 1 around far zeros are ignored.
Containment contains_origin_region(const Poly& outer, const Poly& inner, const ComplexGrid& grid);
/// Embedded region against the origin component of the main region on
/// region_grid(R).
Containment embedded_contains_main(const StabilityPolynomials& polys, int n = 400);

class DegeneratePointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

using Matrix6 = std::array<double, 36>;  // row-major
using Gains = std::array<double, 3>;

/// Linearized (log dt, log error) recursion of a PID controller at a boundary
/// point; entries use Re(z R'/R) and Re(z E'/E). Throws DegeneratePointError
/// when |E(z)| or |R(z)| is below 1e-14.
Matrix6 control_jacobian(const StabilityPolynomials& polys, cplx z, const Gains& beta, int k);

/// Eigenvalues of a dense row-major n x n matrix (Hessenberg QR).
std::vector<cplx> eigenvalues(const double* A, int n);
double spectral_radius(const double* A, int n);
/// Characteristic polynomial det(x I - A) (ascending, monic) by Faddeev-LeVerrier.
Poly characteristic_polynomial(const double* A, int n);
/// All roots of a real polynomial by Aberth iteration.
std::vector<cplx> polynomial_roots(const Poly& p);
/// Spectral radius from the roots of the characteristic polynomial.
double spectral_radius_charpoly(const double* A, int n);

struct ControlSample {
  cplx z;
  double rho;
};

struct ControlStabilityReport {
  std::vector<ControlSample> samples;
  std::vector<cplx> degenerate;  // skipped boundary points
  double max_rho = 0.0;
  cplx argmax{0.0, 0.0};
  double margin = 0.0;
  bool stable = false;  // max_rho < 1 - margin
};

/// Boundary points of the main region used by the scan: n_points samples
/// equispaced in arclength along the part of the origin branch with
/// Re z <= 0 and Im z >= 0 (the lower half follows by conjugation).
std::vector<cplx> control_scan_points(const Poly& R, int n_points);

/// Samples whose neutral mode Re(z R'/R) is below this are degenerate: the
/// recursion does not see the stability boundary there.
inline constexpr double kNeutralModeTol = 1e-9;

/// Beta-independent part of a scan: sample points and the real parts of the
/// logarithmic derivatives there.
struct ControlScanGeometry {
  std::vector<cplx> z;
  std::vector<double> a;  // Re(z R'/R)
  std::vector<double> e;  // Re(z E'/E)
  std::vector<cplx> degenerate;
};
ControlScanGeometry control_scan_geometry(const StabilityPolynomials& polys, int n_points = 512);

/// Jacobian from precomputed logarithmic derivatives.
Matrix6 control_jacobian(double a, double e, const Gains& beta, int k);

ControlStabilityReport control_stability_scan(const StabilityPolynomials& polys, const Gains& beta,
                                              int k, int n_points = 512, double margin = 0.0);
/// det(mu I - J) = mu^2 Q(mu); returns the quartic Q (ascending, monic).
std::array<double, 5> control_quartic(double a, double e, const Gains& beta, int k);

/// Schur-Cohn test: all roots of the real polynomial c (ascending, degree
/// n = c.size() - 1, c[n] != 0) lie strictly inside |mu| < radius.
bool roots_inside(std::vector<double> c, double radius = 1.0);

/// Classification only: rho(J) < 1 - margin at every sample, decided with the
/// Schur-Cohn test on the quartic factor. Much cheaper than the full scan.
bool control_stable(const ControlScanGeometry& geom, const Gains& beta, int k, double margin = 0.0);

/// With stop_early the scan ends at the first sample with rho >= 1 - margin
/// (enough to classify a candidate).
ControlStabilityReport control_stability_scan(const ControlScanGeometry& geom, const Gains& beta,
                                              int k, double margin = 0.0, bool stop_early = false);

struct GridValue {
  cplx z;
  double value;  // NaN where degenerate
};

/// rho(J(z)) on every grid point (not only the boundary).
std::vector<GridValue> control_stability_map(const StabilityPolynomials& polys, const Gains& beta,
                                             int k, const ComplexGrid& grid);

/// CSV with header re,im,value.
void write_csv(std::ostream& os, const std::vector<GridValue>& rows);

}  // namespace lsrk
