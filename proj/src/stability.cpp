#include "lsrk/stability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace lsrk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// c_j = w^T A^{j-1} 1 for j >= 1, c_0 = 1.
Poly weights_polynomial(const std::vector<double>& A, std::size_t n, const std::vector<double>& w) {
  Poly out{1.0};
  std::vector<double> v(n, 1.0), next(n);
  for (std::size_t j = 1; j <= n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * v[i];
    out.push_back(acc);
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0;
      for (std::size_t l = 0; l < n; ++l) r += A[i * n + l] * v[l];
      next[i] = r;
    }
    v.swap(next);
  }
  while (out.size() > 1 && out.back() == 0.0) out.pop_back();
  return out;
}

// Newton on R(z) = w from z; returns false if it does not converge.
bool polish(const Poly& R, cplx w, cplx& z, int max_iter = 30) {
  for (int it = 0; it < max_iter; ++it) {
    const cplx res = poly_eval(R, z) - w;
    if (std::abs(res) <= 1e-13) return true;
    const cplx d = poly_deriv_eval(R, z);
    if (d == cplx(0.0)) return false;
    cplx step = res / d;
    // damping: halve until the residual decreases
    double lam = 1.0;
    for (int h = 0; h < 30; ++h) {
      const cplx trial = z - lam * step;
      if (std::abs(poly_eval(R, trial) - w) < std::abs(res)) {
        z = trial;
        break;
      }
      lam *= 0.5;
      if (h == 29) return std::abs(res) <= 1e-11;
    }
    if (std::abs(lam * step) <= 1e-15 * std::max(1.0, std::abs(z)))
      return std::abs(poly_eval(R, z) - w) <= 1e-11;
  }
  return std::abs(poly_eval(R, z) - w) <= 1e-11;
}

// Linear interpolation of z along the dense path at parameter theta.
cplx path_at(const BoundaryTrace& path, double theta) {
  const auto& th = path.thetas;
  auto it = std::upper_bound(th.begin(), th.end(), theta);
  if (it == th.begin()) return path.points.front();
  if (it == th.end()) return path.points.back();
  const std::size_t i = static_cast<std::size_t>(it - th.begin());
  const double f = (theta - th[i - 1]) / (th[i] - th[i - 1]);
  return path.points[i - 1] + f * (path.points[i] - path.points[i - 1]);
}

cplx polished_sample(const Poly& R, const BoundaryTrace& path, double theta) {
  cplx z = path_at(path, theta);
  const cplx w = std::polar(1.0, theta);
  if (!polish(R, w, z) || std::abs(poly_eval(R, z) - w) > 1e-10)
    throw ContinuationError("boundary sample did not converge", theta);
  return z;
}

}  // namespace

cplx poly_eval(const Poly& p, cplx z) {
  cplx acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
  return acc;
}

cplx poly_deriv_eval(const Poly& p, cplx z) {
  cplx acc = 0.0;
  for (std::size_t j = p.size(); j-- > 1;) acc = acc * z + static_cast<double>(j) * p[j];
  return acc;
}

cplx log_derivative(const Poly& p, cplx z) { return z * poly_deriv_eval(p, z) / poly_eval(p, z); }

StabilityPolynomials stability_polynomials(const ButcherPair& pair) {
  pair.validate();
  StabilityPolynomials out;
  out.R = weights_polynomial(pair.A, pair.s, pair.b);
  if (pair.fsal) {
    const auto [Ae, ce] = pair.extended_tableau();
    out.Rhat = weights_polynomial(Ae, pair.s + 1, pair.bhat);
  } else {
    out.Rhat = weights_polynomial(pair.A, pair.s,
                                  std::vector<double>(pair.bhat.begin(), pair.bhat.end() - 1));
  }
  const std::size_t n = std::max(out.R.size(), out.Rhat.size());
  out.E.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    out.E[j] = (j < out.Rhat.size() ? out.Rhat[j] : 0.0) - (j < out.R.size() ? out.R[j] : 0.0);
  out.s_eff = static_cast<int>(pair.s);
  out.q = pair.q;
  out.qhat = pair.qhat;
  return out;
}

StabilityPolynomials stability_polynomials(const Method& m) {
  return stability_polynomials(to_butcher(m));
}

BoundaryTrace continue_boundary(const Poly& R) {
  if (R.size() < 2) throw ContinuationError("constant stability polynomial", 0.0);
  const int degree = static_cast<int>(R.size()) - 1;
  BoundaryTrace path;
  path.points.push_back(0.0);
  path.thetas.push_back(0.0);
  cplx z = 0.0;
  double theta = 0.0;
  double dtheta = 1e-3;
  const double target = 0.02;  // path increment per step
  for (long steps = 0; steps < 2'000'000; ++steps) {
    const cplx d = poly_deriv_eval(R, z);
    if (std::abs(d) < 1e-300) throw ContinuationError("stationary point on the boundary", theta);
    const double th_new = theta + dtheta;
    const cplx w = std::polar(1.0, th_new);
    cplx zn = z + cplx(0.0, 1.0) * std::polar(1.0, theta) / d * dtheta;
    const bool ok = polish(R, w, zn, 8);
    const double jump = std::abs(zn - z);
    if (!ok || jump > 5.0 * target) {
      dtheta *= 0.25;
      if (dtheta < 1e-12) throw ContinuationError("boundary continuation stalled", theta);
      continue;
    }
    z = zn;
    theta = th_new;
    path.points.push_back(z);
    path.thetas.push_back(theta);
    dtheta *= std::clamp(target / std::max(jump, 1e-300), 0.5, 2.0);
    dtheta = std::min(dtheta, 0.05);

    // back at the origin after a whole number of turns
    const double m = std::round(theta / kTwoPi);
    if (m >= 1 && std::abs(z) < 0.05 && std::abs(theta - kTwoPi * m) < 0.1) {
      path.points.push_back(0.0);
      path.thetas.push_back(kTwoPi * m);
      return path;
    }
    if (theta > kTwoPi * (degree + 1))
      throw ContinuationError("boundary branch does not return to the origin", theta);
  }
  throw ContinuationError("boundary continuation exceeded the step limit", theta);
}

BoundaryTrace trace_boundary(const Poly& R, int n_points) {
  if (n_points < 64) throw std::invalid_argument("trace_boundary needs at least 64 points");
  const BoundaryTrace path = continue_boundary(R);
  const double total = path.thetas.back();
  BoundaryTrace out;
  out.points.reserve(n_points);
  out.thetas.reserve(n_points);
  for (int j = 0; j < n_points; ++j) {
    const double th = total * j / n_points;
    out.points.push_back(j == 0 ? cplx(0.0) : polished_sample(R, path, th));
    out.thetas.push_back(th);
  }
  return out;
}

cplx ComplexGrid::at(int i, int j) const {
  const double x = nre > 1 ? re_lo + (re_hi - re_lo) * i / (nre - 1) : re_lo;
  const double y = nim > 1 ? im_lo + (im_hi - im_lo) * j / (nim - 1) : im_lo;
  return {x, y};
}

BoundaryTrace contour_unit_modulus(const Poly& R, const ComplexGrid& grid) {
  BoundaryTrace out;
  auto g = [&](cplx z) { return std::abs(poly_eval(R, z)) - 1.0; };
  auto bisect = [&](cplx a, cplx b) {
    double fa = g(a);
    for (int it = 0; it < 200; ++it) {
      const cplx m = 0.5 * (a + b);
      const double fm = g(m);
      if (fm == 0.0) return m;
      if ((fm < 0) == (fa < 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
      if (std::abs(b - a) < 1e-15) break;
    }
    return 0.5 * (a + b);
  };
  for (int i = 0; i < grid.nre; ++i) {
    for (int j = 0; j < grid.nim; ++j) {
      const cplx z = grid.at(i, j);
      const double f = g(z);
      for (auto [di, dj] : {std::pair{1, 0}, std::pair{0, 1}}) {
        if (i + di >= grid.nre || j + dj >= grid.nim) continue;
        const cplx zn = grid.at(i + di, j + dj);
        if ((f <= 0) != (g(zn) <= 0)) {
          const cplx r = bisect(z, zn);
          out.points.push_back(r);
          out.thetas.push_back(std::arg(poly_eval(R, r)));
        }
      }
    }
  }
  return out;
}

ComplexGrid region_grid(const Poly& R, int n, double pad) {
  const BoundaryTrace path = continue_boundary(R);
  double xl = 0, xh = 0, yh = 0;
  for (const auto& z : path.points) {
    xl = std::min(xl, z.real());
    xh = std::max(xh, z.real());
    yh = std::max(yh, std::abs(z.imag()));
  }
  const double w = std::max(xh - xl, 2 * yh);
  ComplexGrid g;
  g.re_lo = xl - pad * w;
  g.re_hi = xh + pad * w;
  g.im_lo = -yh - pad * w;
  g.im_hi = yh + pad * w;
  g.nre = g.nim = n;
  return g;
}

Containment contains_region(const Poly& outer, const Poly& inner, const ComplexGrid& grid) {
  Containment out;
  for (int i = 0; i < grid.nre; ++i) {
    for (int j = 0; j < grid.nim; ++j) {
      const cplx z = grid.at(i, j);
      if (std::abs(poly_eval(inner, z)) > 1.0) continue;
      ++out.checked;
      if (std::abs(poly_eval(outer, z)) > 1.0 + 1e-12) {
        out.contained = false;
        out.violations.push_back(z);
      }
    }
  }
  return out;
}

std::vector<char> inside_origin_component(const Poly& R, const ComplexGrid& grid) {
  const BoundaryTrace path = continue_boundary(R);
  std::vector<char> mask(static_cast<std::size_t>(grid.nre) * grid.nim, 0);
  std::vector<double> cross;
  const std::size_t n = path.points.size();
  for (int j = 0; j < grid.nim; ++j) {
    const double y = grid.at(0, j).imag();
    cross.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const cplx a = path.points[i], b = path.points[(i + 1) % n];
      if ((a.imag() > y) != (b.imag() > y))
        cross.push_back(a.real() + (y - a.imag()) / (b.imag() - a.imag()) * (b.real() - a.real()));
    }
    std::sort(cross.begin(), cross.end());
    for (int i = 0; i < grid.nre; ++i) {
      const double x = grid.at(i, j).real();
      const auto below = std::lower_bound(cross.begin(), cross.end(), x) - cross.begin();
      mask[static_cast<std::size_t>(j) * grid.nre + i] = below % 2 == 1;
    }
  }
  return mask;
}

Containment contains_origin_region(const Poly& outer, const Poly& inner, const ComplexGrid& grid) {
  const auto mask = inside_origin_component(inner, grid);
  Containment out;
  for (int j = 0; j < grid.nim; ++j) {
    for (int i = 0; i < grid.nre; ++i) {
      const cplx z = grid.at(i, j);
      if (!mask[static_cast<std::size_t>(j) * grid.nre + i] || std::abs(poly_eval(inner, z)) > 1.0)
        continue;
      ++out.checked;
      if (std::abs(poly_eval(outer, z)) > 1.0 + 1e-12) {
        out.contained = false;
        out.violations.push_back(z);
      }
    }
  }
  return out;
}

Containment embedded_contains_main(const StabilityPolynomials& polys, int n) {
  return contains_origin_region(polys.Rhat, polys.R, region_grid(polys.R, n));
}

Matrix6 control_jacobian(double a, double e, const Gains& beta, int k) {
  if (k < 1) throw std::invalid_argument("controller exponent k must be positive");
  const double b1 = beta[0] / k, b2 = beta[1] / k, b3 = beta[2] / k;
  Matrix6 J{};
  auto at = [&J](int i, int j) -> double& { return J[i * 6 + j]; };
  at(0, 0) = 1.0;
  at(0, 1) = a;
  at(1, 0) = -b1;
  at(1, 1) = 1.0 - b1 * e;
  at(1, 2) = -b2;
  at(1, 3) = -b2 * e;
  at(1, 4) = -b3;
  at(1, 5) = -b3 * e;
  at(2, 0) = 1.0;
  at(3, 1) = 1.0;
  at(4, 2) = 1.0;
  at(5, 3) = 1.0;
  return J;
}

Matrix6 control_jacobian(const StabilityPolynomials& polys, cplx z, const Gains& beta, int k) {
  const cplx Rz = poly_eval(polys.R, z);
  const cplx Ez = poly_eval(polys.E, z);
  if (std::abs(Rz) < 1e-14) throw DegeneratePointError("R(z) vanishes at the sample");
  if (std::abs(Ez) < 1e-14) throw DegeneratePointError("E(z) vanishes at the sample");
  const double a = (z * poly_deriv_eval(polys.R, z) / Rz).real();
  const double e = (z * poly_deriv_eval(polys.E, z) / Ez).real();
  return control_jacobian(a, e, beta, k);
}

std::vector<cplx> eigenvalues(const double* A, int n) {
  Eigen::MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = A[i * n + j];
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
  const auto ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double spectral_radius(const double* A, int n) {
  if (n == 6) {
    Eigen::Matrix<double, 6, 6, Eigen::RowMajor> M = Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>>(A);
    Eigen::EigenSolver<Eigen::Matrix<double, 6, 6>> es(M, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  double r = 0.0;
  for (const auto& l : eigenvalues(A, n)) r = std::max(r, std::abs(l));
  return r;
}

Poly characteristic_polynomial(const double* A, int n) {
  // M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k) / k
  Poly c(n + 1, 0.0);
  c[n] = 1.0;
  std::vector<double> M(n * n, 0.0), AM(n * n);
  for (int k = 1; k <= n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += A[i * n + l] * M[l * n + j];
        AM[i * n + j] = s;
      }
    }
    for (int i = 0; i < n; ++i) AM[i * n + i] += c[n - k + 1];
    M.swap(AM);
    double tr = 0.0;
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) tr += A[i * n + l] * M[l * n + i];
    c[n - k] = -tr / k;
  }
  return c;
}

std::vector<cplx> polynomial_roots(const Poly& p_in) {
  Poly p = p_in;
  while (!p.empty() && p.back() == 0.0) p.pop_back();
  if (p.size() < 2) return {};
  const int n = static_cast<int>(p.size()) - 1;
  // Cauchy bound for the starting circle
  double bound = 0.0;
  for (int j = 0; j < n; ++j) bound = std::max(bound, std::abs(p[j] / p[n]));
  const double radius = 1.0 + bound;
  std::vector<cplx> z(n);
  for (int j = 0; j < n; ++j) z[j] = std::polar(0.5 * radius, kTwoPi * (j + 0.25) / n + 0.4);
  for (int it = 0; it < 500; ++it) {
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      const cplx f = poly_eval(p, z[j]);
      const cplx d = poly_deriv_eval(p, z[j]);
      if (f == cplx(0.0)) continue;
      const cplx ratio = f / d;
      cplx sum = 0.0;
      for (int l = 0; l < n; ++l)
        if (l != j) sum += 1.0 / (z[j] - z[l]);
      const cplx w = ratio / (1.0 - ratio * sum);
      z[j] -= w;
      worst = std::max(worst, std::abs(w) / std::max(1.0, std::abs(z[j])));
    }
    if (worst < 1e-16) break;
  }
  return z;
}

double spectral_radius_charpoly(const double* A, int n) {
  double r = 0.0;
  for (const auto& l : polynomial_roots(characteristic_polynomial(A, n))) r = std::max(r, std::abs(l));
  return r;
}

std::vector<cplx> control_scan_points(const Poly& R, int n_points) {
  if (n_points < 2) throw std::invalid_argument("control scan needs at least two points");
  const BoundaryTrace path = continue_boundary(R);
  // arclength restricted to the second-quadrant part of the upper half branch
  std::vector<double> arc{0.0};
  std::size_t end = path.points.size();
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    if (path.points[i].imag() < 0.0) {
      end = i;
      break;
    }
  }
  for (std::size_t i = 1; i < end; ++i) {
    const cplx a = path.points[i - 1], b = path.points[i];
    const bool in = a.real() <= 0.0 && b.real() <= 0.0;
    arc.push_back(arc.back() + (in ? std::abs(b - a) : 0.0));
  }
  // close the branch on the real axis
  cplx last = path.points[end - 1];
  double th_last = path.thetas[end - 1];
  if (end < path.points.size()) {
    const cplx a = path.points[end - 1], b = path.points[end];
    const double f = a.imag() / (a.imag() - b.imag());
    th_last = path.thetas[end - 1] + f * (path.thetas[end] - path.thetas[end - 1]);
    last = a + f * (b - a);
    arc.push_back(arc.back() + (last.real() <= 0.0 ? std::abs(last - a) : 0.0));
  }
  const double L = arc.back();
  if (!(L > 0.0)) throw ContinuationError("no second-quadrant boundary to scan", th_last);
  std::vector<double> thetas(path.thetas.begin(), path.thetas.begin() + end);
  if (end < path.points.size()) thetas.push_back(th_last);

  std::vector<cplx> out;
  out.reserve(n_points);
  std::size_t seg = 1;
  for (int j = 0; j < n_points; ++j) {
    const double s = L * j / (n_points - 1);
    while (seg + 1 < arc.size() && (arc[seg] < s || arc[seg] == arc[seg - 1])) ++seg;
    const double width = arc[seg] - arc[seg - 1];
    const double f = width > 0 ? std::clamp((s - arc[seg - 1]) / width, 0.0, 1.0) : 1.0;
    const double th = thetas[seg - 1] + f * (thetas[seg] - thetas[seg - 1]);
    cplx z = polished_sample(R, path, th);
    // the real-axis endpoint comes out with a tiny imaginary part of either sign
    if (std::abs(z.imag()) < 1e-12) z = {z.real(), 0.0};
    out.push_back(z);
  }
  return out;
}

ControlScanGeometry control_scan_geometry(const StabilityPolynomials& polys, int n_points) {
  ControlScanGeometry g;
  for (const cplx z : control_scan_points(polys.R, n_points)) {
    const cplx Rz = poly_eval(polys.R, z);
    const cplx Ez = poly_eval(polys.E, z);
    if (std::abs(Rz) < 1e-14 || std::abs(Ez) < 1e-14) {
      g.degenerate.push_back(z);
      continue;
    }
    const double a = (z * poly_deriv_eval(polys.R, z) / Rz).real();
    if (std::abs(a) < kNeutralModeTol) {
      g.degenerate.push_back(z);
      continue;
    }
    g.z.push_back(z);
    g.a.push_back(a);
    g.e.push_back((z * poly_deriv_eval(polys.E, z) / Ez).real());
  }
  return g;
}

ControlStabilityReport control_stability_scan(const ControlScanGeometry& geom, const Gains& beta,
                                              int k, double margin, bool stop_early) {
  ControlStabilityReport rep;
  rep.margin = margin;
  rep.degenerate = geom.degenerate;
  // the negative real axis end is visited first: that is where unstable
  // controllers usually fail
  for (std::size_t n = geom.z.size(); n-- > 0;) {
    const Matrix6 J = control_jacobian(geom.a[n], geom.e[n], beta, k);
    const double rho = spectral_radius(J.data(), 6);
    rep.samples.push_back({geom.z[n], rho});
    if (rho > rep.max_rho) {
      rep.max_rho = rho;
      rep.argmax = geom.z[n];
    }
    if (stop_early && rho >= 1.0 - margin) break;
  }
  std::reverse(rep.samples.begin(), rep.samples.end());
  rep.stable = !rep.samples.empty() && rep.max_rho < 1.0 - margin;
  return rep;
}

std::array<double, 5> control_quartic(double a, double e, const Gains& beta, int k) {
  if (k < 1) throw std::invalid_argument("controller exponent k must be positive");
  const double b1 = beta[0] / k, b2 = beta[1] / k, b3 = beta[2] / k;
  return {b3 * (a - e), a * b2 - b2 * e + b3 * e, a * b1 - b1 * e + b2 * e + 1.0, b1 * e - 2.0, 1.0};
}

bool roots_inside(std::vector<double> c, double radius) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  if (c.size() <= 1) return true;
  double r = 1.0;
  for (auto& x : c) {
    x *= r;
    r *= radius;
  }
  // (c_n c(z) - c_0 c*(z)) / z keeps the roots inside iff |c_0| < |c_n|
  while (c.size() > 1) {
    const std::size_t n = c.size() - 1;
    const double c0 = c[0], cn = c[n];
    if (!(std::abs(c0) < std::abs(cn))) return false;
    std::vector<double> next(n);
    for (std::size_t j = 1; j <= n; ++j) next[j - 1] = cn * c[j] - c0 * c[n - j];
    const double scale = std::abs(next.back());
    if (scale == 0.0) return false;
    for (auto& x : next) x /= scale;
    c.swap(next);
  }
  return true;
}

bool control_stable(const ControlScanGeometry& geom, const Gains& beta, int k, double margin) {
  if (geom.z.empty()) return false;
  for (std::size_t n = geom.z.size(); n-- > 0;) {
    const auto q = control_quartic(geom.a[n], geom.e[n], beta, k);
    if (!roots_inside({q.begin(), q.end()}, 1.0 - margin)) return false;
  }
  return true;
}

ControlStabilityReport control_stability_scan(const StabilityPolynomials& polys, const Gains& beta,
                                              int k, int n_points, double margin) {
  return control_stability_scan(control_scan_geometry(polys, n_points), beta, k, margin, false);
}

std::vector<GridValue> control_stability_map(const StabilityPolynomials& polys, const Gains& beta,
                                             int k, const ComplexGrid& grid) {
  std::vector<GridValue> out;
  out.reserve(static_cast<std::size_t>(grid.nre) * grid.nim);
  for (int j = 0; j < grid.nim; ++j) {
    for (int i = 0; i < grid.nre; ++i) {
      const cplx z = grid.at(i, j);
      double v = std::numeric_limits<double>::quiet_NaN();
      try {
        const Matrix6 J = control_jacobian(polys, z, beta, k);
        v = spectral_radius(J.data(), 6);
      } catch (const DegeneratePointError&) {
      }
      out.push_back({z, v});
    }
  }
  return out;
}

void write_csv(std::ostream& os, const std::vector<GridValue>& rows) {
  const auto old = os.precision(17);
  os << "re,im,value\n";
  for (const auto& r : rows) os << r.z.real() << ',' << r.z.imag() << ',' << r.value << '\n';
  os.precision(old);
}

}  // namespace lsrk
