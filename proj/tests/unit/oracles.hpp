#pragma once

// Independent reference computations shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lsrk/coefficients.hpp"
#include "lsrk/ode.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline Mat dense(const lsrk::ButcherPair& p) {
  Mat A(p.s, Vec(p.s, 0.0));
  for (std::size_t i = 0; i < p.s; ++i)
    for (std::size_t j = 0; j < p.s; ++j) A[i][j] = p.a(i, j);
  return A;
}

inline Mat extended(const lsrk::ButcherPair& p) {
  Mat A(p.s + 1, Vec(p.s + 1, 0.0));
  for (std::size_t i = 0; i < p.s; ++i)
    for (std::size_t j = 0; j < p.s; ++j) A[i][j] = p.a(i, j);
  for (std::size_t j = 0; j < p.s; ++j) A[p.s][j] = p.b[j];
  return A;
}

inline Vec mul(const Mat& A, const Vec& v) {
  Vec r(A.size(), 0.0);
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) r[i] += A[i][j] * v[j];
  return r;
}
inline Vec had(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * b[i];
  return r;
}
inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Largest |Phi(t) - 1/gamma(t)| over the rooted trees of order <= up_to,
/// written out tree by tree.
inline double order_defect(const Mat& A, const Vec& w, int up_to) {
  const std::size_t n = A.size();
  Vec e(n, 1.0);
  const Vec c = mul(A, e);
  const Vec Ac = mul(A, c);
  const Vec c2 = had(c, c);
  const Vec AAc = mul(A, Ac);
  struct T {
    int order;
    double phi, inv_gamma;
  };
  std::vector<T> trees{
      {1, dot(w, e), 1.0},
      {2, dot(w, c), 1.0 / 2},
      {3, dot(w, c2), 1.0 / 3},
      {3, dot(w, Ac), 1.0 / 6},
      {4, dot(w, had(c2, c)), 1.0 / 4},
      {4, dot(w, had(c, Ac)), 1.0 / 8},
      {4, dot(w, mul(A, c2)), 1.0 / 12},
      {4, dot(w, AAc), 1.0 / 24},
      {5, dot(w, had(c2, c2)), 1.0 / 5},
      {5, dot(w, had(c2, Ac)), 1.0 / 10},
      {5, dot(w, had(c, mul(A, c2))), 1.0 / 15},
      {5, dot(w, had(c, AAc)), 1.0 / 30},
      {5, dot(w, had(Ac, Ac)), 1.0 / 20},
      {5, dot(w, mul(A, had(c2, c))), 1.0 / 20},
      {5, dot(w, mul(A, had(c, Ac))), 1.0 / 40},
      {5, dot(w, mul(A, mul(A, c2))), 1.0 / 60},
      {5, dot(w, mul(A, AAc)), 1.0 / 120},
  };
  double worst = 0.0;
  for (const auto& t : trees)
    if (t.order <= up_to) worst = std::max(worst, std::abs(t.phi - t.inv_gamma));
  return worst;
}

/// u' = M u + 0.3 u .* (N u) + 0.1 sin(t) on 10 components, fixed seed.
class QuadraticOde : public lsrk::Semidiscretization {
 public:
  explicit QuadraticOde(std::size_t n = 10, unsigned seed = 7) : n_(n), M_(n * n), N_(n * n) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& x : M_) x = u(rng) / std::sqrt(double(n));
    for (auto& x : N_) x = u(rng) / std::sqrt(double(n));
  }
  std::size_t size() const override { return n_; }
  void rhs(double t, const lsrk::State& y, lsrk::State& dy) const override {
    dy.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      double a = 0.0, b = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        a += M_[i * n_ + j] * y[j];
        b += N_[i * n_ + j] * y[j];
      }
      dy[i] = a + 0.3 * y[i] * b + 0.1 * std::sin(t + double(i));
    }
  }

 private:
  std::size_t n_;
  std::vector<double> M_, N_;
};

inline double max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace oracle
