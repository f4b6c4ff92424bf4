#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lsrk/stability.hpp"

using namespace lsrk;

namespace {

const char* kAll[] = {"rk35-3s+", "rk35-3s+fsal", "rk49-3s+", "rk49-3s+fsal", "rk510-3s+",
                      "rk510-3s+fsal", "ssp33", "ssp43", "bs3", "bs5", "dp5", "rk45-3s*"};

ButcherPair classical_rk4() {
  ButcherPair p;
  p.name = "rk4";
  p.s = 4;
  p.A = {0, 0, 0, 0, 0.5, 0, 0, 0, 0, 0.5, 0, 0, 0, 0, 1, 0};
  p.b = {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6};
  p.c = {0, 0.5, 0.5, 1};
  p.bhat = {0, 0, 0, 1, 0};  // crude, only to have something embedded
  p.q = 4;
  p.qhat = 1;
  return p;
}

ButcherPair forward_euler() {
  ButcherPair p;
  p.name = "euler";
  p.s = 1;
  p.A = {0.0};
  p.b = {1.0};
  p.c = {0.0};
  p.bhat = {0.5, 0.5};
  p.fsal = true;
  p.q = p.qhat = 1;
  return p;
}

double eigen_radius(const Eigen::MatrixXd& M) {
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("stability polynomials") {
  SUBCASE("classical RK4") {
    const auto sp = stability_polynomials(classical_rk4());
    REQUIRE(sp.R.size() >= 5);
    const double want[] = {1.0, 1.0, 0.5, 1.0 / 6, 1.0 / 24};
    for (int j = 0; j < 5; ++j) CHECK(sp.R[j] == doctest::Approx(want[j]).epsilon(1e-15));
    for (std::size_t j = 5; j < sp.R.size(); ++j) CHECK(sp.R[j] == 0.0);
  }
  SUBCASE("SSP3(2)3 embedded difference starts at z^3") {
    const auto sp = stability_polynomials(catalog_get("ssp33"));
    for (int j = 0; j < 3; ++j) CHECK(std::abs(sp.E[j]) <= 1e-15);
    CHECK(std::abs(sp.E[3]) > 1e-3);
  }
  SUBCASE("BS3(2)3 embedded polynomial uses the FSAL stage") {
    const auto sp = stability_polynomials(catalog_get("bs3"));
    int deg = int(sp.Rhat.size()) - 1;
    while (deg > 0 && sp.Rhat[deg] == 0.0) --deg;
    CHECK(deg == 4);
  }
  SUBCASE("consistency of every catalog pair") {
    for (const char* name : kAll) {
      CAPTURE(name);
      const auto m = catalog_get(name);
      const auto sp = stability_polynomials(m);
      const auto o = method_orders(m);
      CHECK(sp.R[0] == 1.0);
      CHECK(sp.E[0] == 0.0);
      for (int j = 0; j <= std::min(o.q, o.qhat); ++j) CHECK(std::abs(sp.E[j]) <= 1e-12);
      // Taylor coefficients of exp through the main order
      double fact = 1.0;
      for (int j = 0; j <= o.q; ++j) {
        if (j) fact *= j;
        CHECK(sp.R[j] == doctest::Approx(1.0 / fact).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("logarithmic derivative matches finite differences") {
  const auto sp = stability_polynomials(catalog_get("rk49-3s+"));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-4.0, 1.0), V(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const cplx z(U(rng), V(rng));
    if (std::abs(poly_eval(sp.R, z)) < 1e-6) continue;
    const double h = 1e-5;
    // z R'/R with R' by central differences
    const cplx fd = z * (poly_eval(sp.R, z + h) - poly_eval(sp.R, z - h)) / (2 * h) / poly_eval(sp.R, z);
    const cplx ld = log_derivative(sp.R, z);
    CHECK(std::abs(ld - fd) <= 1e-6 * std::max(1.0, std::abs(ld)));
  }
}

TEST_CASE("boundary tracing") {
  SUBCASE("forward Euler traces the unit circle around -1") {
    const auto sp = stability_polynomials(forward_euler());
    const auto tr = trace_boundary(sp.R, 256);
    REQUIRE(tr.points.size() >= 64);
    double worst = 0.0;
    for (auto z : tr.points) worst = std::max(worst, std::abs(std::abs(z + 1.0) - 1.0));
    CHECK(worst <= 1e-9);
  }
  SUBCASE("RK4 crosses the negative real axis where |R| = 1") {
    const auto sp = stability_polynomials(classical_rk4());
    // bisection on the real axis
    double lo = -3.0, hi = -2.0;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (std::abs(poly_eval(sp.R, mid)) > 1.0 ? lo : hi) = mid;
    }
    CHECK(lo == doctest::Approx(-2.785).epsilon(1e-3));
    // traced crossing, interpolated between the two samples straddling Im z = 0
    const auto tr = continue_boundary(sp.R);
    double crossing = 0.0;
    for (std::size_t i = 1; i < tr.points.size(); ++i) {
      const cplx a = tr.points[i - 1], b = tr.points[i];
      if (a.real() < -2.0 && (a.imag() > 0) != (b.imag() > 0)) {
        const double w = a.imag() / (a.imag() - b.imag());
        crossing = a.real() + w * (b.real() - a.real());
      }
    }
    CHECK(std::abs(crossing - lo) <= 1e-4);
  }
  SUBCASE("catalog boundaries: unit modulus and conjugate symmetry") {
    for (const char* name : kAll) {
      CAPTURE(name);
      const auto sp = stability_polynomials(catalog_get(name));
      const auto tr = trace_boundary(sp.R, 512);
      REQUIRE(tr.points.size() == tr.thetas.size());
      double worst = 0.0, gap = 0.0, spacing = 0.0;
      for (std::size_t i = 0; i < tr.points.size(); ++i) {
        worst = std::max(worst, std::abs(std::abs(poly_eval(sp.R, tr.points[i])) - 1.0));
        if (i) spacing = std::max(spacing, std::abs(tr.points[i] - tr.points[i - 1]));
      }
      CHECK(worst <= 1e-10);
      for (auto z : tr.points) {
        double best = 1e300;
        for (auto w : tr.points) best = std::min(best, std::abs(w - std::conj(z)));
        gap = std::max(gap, best);
      }
      CHECK(gap <= spacing);
    }
  }
  CHECK_THROWS_AS(trace_boundary(stability_polynomials(forward_euler()).R, 10), std::invalid_argument);
}

TEST_CASE("grid contour fallback finds the same circle") {
  const auto sp = stability_polynomials(forward_euler());
  const auto tr = contour_unit_modulus(sp.R, ComplexGrid{-2.2, 0.2, -1.2, 1.2, 200, 200});
  REQUIRE(!tr.points.empty());
  for (auto z : tr.points) CHECK(std::abs(std::abs(z + 1.0) - 1.0) <= 1e-8);
}

TEST_CASE("region containment") {
  SUBCASE("a polynomial contains itself") {
    const auto sp = stability_polynomials(catalog_get("rk35-3s+"));
    const auto g = region_grid(sp.R, 200);
    CHECK(contains_region(sp.R, sp.R, g).contained);
  }
  SUBCASE("a smaller disk is contained in a larger one") {
    // |1 + z| <= 1 inside |1 + z/2| <= 1
    const Poly small{1.0, 1.0}, big{1.0, 0.5};
    const auto g = region_grid(big, 200);
    const auto c = contains_region(big, small, g);
    CHECK(c.contained);
    CHECK(c.checked > 0);
    const auto r = contains_region(small, big, g);
    CHECK_FALSE(r.contained);
    CHECK(!r.violations.empty());
  }
  SUBCASE("BS3(2)3 embedded region contains the main one") {
    CHECK(embedded_contains_main(stability_polynomials(catalog_get("bs3")), 400).contained);
  }
  SUBCASE("origin component excludes detached islands") {
    const auto sp = stability_polynomials(catalog_get("rk49-3s+"));
    const auto g = region_grid(sp.R, 200);
    const auto mask = inside_origin_component(sp.R, g);
    long in_component = 0, in_region = 0;
    for (int i = 0; i < g.nre; ++i)
      for (int j = 0; j < g.nim; ++j) {
        const bool inside = std::abs(poly_eval(sp.R, g.at(i, j))) <= 1.0;
        in_region += inside;
        const char m = mask[std::size_t(j) * g.nre + i];
        in_component += m;
        if (m) CHECK(std::abs(poly_eval(sp.R, g.at(i, j))) <= 1.0 + 1e-9);
      }
    CHECK(in_component > 0);
    CHECK(in_component <= in_region);
  }
}

TEST_CASE("spectral radius two ways") {
  std::mt19937 rng(17);
  std::normal_distribution<double> N;
  for (int n : {2, 3, 4, 6, 8}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> A(std::size_t(n * n));
      for (auto& x : A) x = N(rng);
      Eigen::MatrixXd M(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = A[std::size_t(i * n + j)];
      const double ref = eigen_radius(M);
      CHECK(spectral_radius(A.data(), n) == doctest::Approx(ref).epsilon(1e-8));
      CHECK(spectral_radius_charpoly(A.data(), n) == doctest::Approx(ref).epsilon(1e-8));
    }
  }
  SUBCASE("characteristic polynomial of a diagonal matrix") {
    const double D[9] = {1, 0, 0, 0, 2, 0, 0, 0, 3};
    const auto c = characteristic_polynomial(D, 3);
    // (x-1)(x-2)(x-3) = -6 + 11x - 6x^2 + x^3
    const double want[] = {-6, 11, -6, 1};
    for (int i = 0; i < 4; ++i) CHECK(c[i] == doctest::Approx(want[i]));
  }
}

TEST_CASE("Schur-Cohn classification agrees with explicit roots") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> U(-1.2, 1.2);
  int inside = 0, outside = 0;
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> c(5);
    for (auto& x : c) x = U(rng);
    c[4] = 1.0;
    const auto roots = polynomial_roots(c);
    double r = 0.0;
    for (auto z : roots) r = std::max(r, std::abs(z));
    if (std::abs(r - 1.0) < 1e-6) continue;
    CHECK(roots_inside(c) == (r < 1.0));
    (r < 1.0 ? inside : outside)++;
  }
  CHECK(inside > 50);
  CHECK(outside > 50);
}

TEST_CASE("control Jacobian") {
  const auto sp = stability_polynomials(catalog_get("bs5"));
  const auto tr = trace_boundary(sp.R, 128);
  SUBCASE("zero gains leave a neutral shift") {
    const auto z = tr.points[40];
    const auto J = control_jacobian(sp, z, {0.0, 0.0, 0.0}, 5);
    CHECK(spectral_radius(J.data(), 6) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("closed-form quartic matches the characteristic polynomial") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int t = 0; t < 50; ++t) {
      const double a = U(rng), e = U(rng);
      const Gains b{U(rng) / 3, U(rng) / 3, U(rng) / 10};
      const auto J = control_jacobian(a, e, b, 4);
      const auto cp = characteristic_polynomial(J.data(), 6);
      const auto q = control_quartic(a, e, b, 4);
      CHECK(std::abs(cp[0]) <= 1e-10);
      CHECK(std::abs(cp[1]) <= 1e-10);
      for (int i = 0; i < 5; ++i) CHECK(cp[i + 2] == doctest::Approx(q[i]).scale(1.0).epsilon(1e-10));
    }
  }
  SUBCASE("the polynomial and (a, e) forms agree") {
    const auto z = tr.points[17];
    const auto J1 = control_jacobian(sp, z, {0.6, -0.2, 0.0}, 5);
    const auto J2 = control_jacobian(log_derivative(sp.R, z).real(), log_derivative(sp.E, z).real(),
                                     {0.6, -0.2, 0.0}, 5);
    for (int i = 0; i < 36; ++i) CHECK(J1[i] == doctest::Approx(J2[i]));
  }
  CHECK_THROWS_AS(control_jacobian(sp, cplx(0.0, 0.0), {0.6, -0.2, 0.0}, 5), DegeneratePointError);
}

TEST_CASE("control stability scans") {
  SUBCASE("BS5(4)7F with PI34 is unstable near the negative real axis") {
    const auto sp = stability_polynomials(catalog_get("bs5"));
    const auto r = control_stability_scan(sp, {0.7, -0.4, 0.0}, 5, 512);
    CHECK_FALSE(r.stable);
    CHECK(r.max_rho > 1.0);
    CHECK(r.argmax.real() < -3.0);
    CHECK(std::abs(r.argmax.imag()) < 0.5);
    CHECK(r.samples.size() + r.degenerate.size() == 512);
  }
  SUBCASE("tuned gains are stable") {
    struct Case {
      const char* name;
      Gains beta;
    };
    for (const Case& c : {Case{"bs5", {0.28, -0.23, 0.0}}, Case{"bs3", {0.6, -0.2, 0.0}},
                          Case{"rk35-3s+fsal", {0.70, -0.23, 0.0}}}) {
      CAPTURE(c.name);
      const auto m = catalog_get(c.name);
      const auto r = control_stability_scan(stability_polynomials(m), c.beta, method_orders(m).k(), 512);
      CHECK(r.stable);
      CHECK(r.max_rho < 1.0);
      CHECK(r.degenerate.size() <= 2);
    }
  }
  SUBCASE("margin tightens the verdict") {
    const auto sp = stability_polynomials(catalog_get("bs5"));
    const auto r = control_stability_scan(sp, {0.28, -0.23, 0.0}, 5, 512, 0.0);
    REQUIRE(r.stable);
    const auto tight = control_stability_scan(sp, {0.28, -0.23, 0.0}, 5, 512, 1.0 - r.max_rho + 1e-6);
    CHECK_FALSE(tight.stable);
  }
  SUBCASE("fast filter agrees with the eigenvalue scan") {
    const auto m = catalog_get("rk35-3s+fsal");
    const auto sp = stability_polynomials(m);
    const auto geom = control_scan_geometry(sp, 512);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> b1(0.1, 1.0), b2(-0.4, -0.05), b3(0.0, 0.1);
    int agree = 0;
    for (int t = 0; t < 60; ++t) {
      const Gains g{b1(rng), b2(rng), b3(rng)};
      const auto full = control_stability_scan(geom, g, 3, 0.0, false);
      if (std::abs(full.max_rho - 1.0) < 1e-6) continue;
      CHECK(control_stable(geom, g, 3) == full.stable);
      ++agree;
    }
    CHECK(agree > 40);
  }
}

TEST_CASE("control maps and CSV") {
  const auto sp = stability_polynomials(catalog_get("bs3"));
  const auto rows = control_stability_map(sp, {0.6, -0.2, 0.0}, 3, ComplexGrid{-3, 0, 0, 2, 5, 4});
  CHECK(rows.size() == 20);
  std::ostringstream os;
  write_csv(os, rows);
  const std::string out = os.str();
  CHECK(out.rfind("re,im,value\n", 0) == 0);
  CHECK(std::count(out.begin(), out.end(), '\n') == 21);
}
