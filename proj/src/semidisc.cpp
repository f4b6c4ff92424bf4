#include "lsrk/semidisc.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>

namespace lsrk {

// ---------------------------------------------------------------------------
// LGL operator

std::pair<double, double> legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  // derivative from (1 - x^2) P_n' = n (P_{n-1} - x P_n), valid off the endpoints
  double dp;
  if (std::abs(std::abs(x) - 1.0) < 1e-15) {
    dp = 0.5 * n * (n + 1.0) * (x > 0 ? 1.0 : (n % 2 == 0 ? -1.0 : 1.0));
  } else {
    dp = n * (p0 - x * p1) / (1.0 - x * x);
  }
  return {p1, dp};
}

LglOperator LglOperator::make(int p) {
  if (p < 1) throw std::invalid_argument("LGL operator needs degree p >= 1");
  LglOperator op;
  op.p = p;
  const std::size_t n = p + 1;
  op.nodes.resize(n);
  op.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = -std::cos(M_PI * static_cast<double>(i) / p);
    if (i > 0 && i < n - 1) {
      // Newton on x P_p - P_{p-1}, whose interior roots are those of P_p'
      for (int it = 0; it < 100; ++it) {
        double pm1 = 1.0, pc = x;
        for (int k = 2; k <= p; ++k) {
          const double pn = ((2.0 * k - 1.0) * x * pc - (k - 1.0) * pm1) / k;
          pm1 = pc;
          pc = pn;
        }
        const double dx = (x * pc - pm1) / ((p + 1.0) * pc);
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
    }
    op.nodes[i] = x;
    const double Pp = legendre(p, x).first;
    op.weights[i] = 2.0 / (p * (p + 1.0) * Pp * Pp);
  }
  // symmetrize
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (op.nodes[n - 1 - i] - op.nodes[i]);
    op.nodes[i] = -x;
    op.nodes[n - 1 - i] = x;
    const double w = 0.5 * (op.weights[i] + op.weights[n - 1 - i]);
    op.weights[i] = op.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) op.nodes[n / 2] = 0.0;

  std::vector<double> bary(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) bary[j] /= op.nodes[j] - op.nodes[k];
  op.D.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double v = (bary[j] / bary[i]) / (op.nodes[i] - op.nodes[j]);
      op.D[i * n + j] = v;
      diag -= v;
    }
    op.D[i * n + i] = diag;
  }
  return op;
}

std::vector<double> LglOperator::basis_at(double x) const {
  const std::size_t m = n();
  std::vector<double> l(m, 1.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k)
      if (k != j) l[j] *= (x - nodes[k]) / (nodes[j] - nodes[k]);
  return l;
}

// ---------------------------------------------------------------------------
// Grid

Grid Grid::uniform(int dim, std::array<int, 2> elements, std::array<double, 2> lo,
                   std::array<double, 2> hi) {
  Grid g;
  g.dim = dim;
  g.elements = elements;
  g.lo = lo;
  g.hi = hi;
  if (dim == 1) {
    g.elements[1] = 1;
    g.lo[1] = 0.0;
    g.hi[1] = 1.0;
  }
  for (int d = 0; d < 2; ++d) {
    const int K = g.elements[d];
    if (K < 1) throw std::invalid_argument("grid needs at least one element per direction");
    g.breaks[d].resize(K + 1);
    for (int k = 0; k <= K; ++k) g.breaks[d][k] = g.lo[d] + (g.hi[d] - g.lo[d]) * k / K;
    g.breaks[d][K] = g.hi[d];
  }
  g.validate();
  return g;
}

Grid Grid::perturbed(int dim, std::array<int, 2> elements, std::array<double, 2> lo,
                     std::array<double, 2> hi, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude < 0.5))
    throw std::invalid_argument("grid perturbation amplitude must lie in [0, 0.5)");
  Grid g = uniform(dim, elements, lo, hi);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int d = 0; d < dim; ++d) {
    const double h = g.length(d) / g.elements[d];
    for (int k = 1; k < g.elements[d]; ++k) g.breaks[d][k] += amplitude * h * U(rng);
  }
  g.validate();
  return g;
}

void Grid::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  for (int d = 0; d < dim; ++d) {
    if (elements[d] < 1) throw std::invalid_argument("grid needs at least one element");
    if (!(hi[d] > lo[d])) throw std::invalid_argument("grid bounds must satisfy lo < hi");
    if (breaks[d].size() != static_cast<std::size_t>(elements[d] + 1))
      throw std::invalid_argument("grid interfaces do not match the element count");
    for (int k = 0; k < elements[d]; ++k)
      if (!(breaks[d][k + 1] > breaks[d][k]))
        throw std::invalid_argument("grid interfaces must increase");
  }
}

bool Grid::is_uniform(double tol) const {
  for (int d = 0; d < dim; ++d) {
    const double h = length(d) / elements[d];
    for (int e = 0; e < elements[d]; ++e)
      if (std::abs(width(d, e) - h) > tol * h) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Shared DG machinery

namespace {
std::vector<double> compute_coordinates(const Grid& grid_, const LglOperator& op_, std::size_t npe_);
}

DgSemidiscretization::DgSemidiscretization(Grid grid, int p, std::size_t nv)
    : grid_(std::move(grid)), op_(LglOperator::make(p)), nv_(nv) {
  grid_.validate();
  npe_ = grid_.dim == 1 ? op_.n() : op_.n() * op_.n();
  size_ = static_cast<std::size_t>(grid_.num_elements()) * npe_ * nv_;
  coords_ = compute_coordinates(grid_, op_, npe_);
}

namespace {

std::vector<double> compute_coordinates(const Grid& grid_, const LglOperator& op_, std::size_t npe_) {
  const std::size_t n = op_.n();
  const int dim = grid_.dim;
  std::vector<double> xs(static_cast<std::size_t>(grid_.num_elements()) * npe_ * dim);
  std::size_t idx = 0;
  for (int ey = 0; ey < (dim == 2 ? grid_.elements[1] : 1); ++ey)
    for (int ex = 0; ex < grid_.elements[0]; ++ex)
      for (std::size_t j = 0; j < (dim == 2 ? n : 1); ++j)
        for (std::size_t i = 0; i < n; ++i) {
          xs[idx++] = grid_.breaks[0][ex] + 0.5 * (op_.nodes[i] + 1.0) * grid_.width(0, ex);
          if (dim == 2)
            xs[idx++] = grid_.breaks[1][ey] + 0.5 * (op_.nodes[j] + 1.0) * grid_.width(1, ey);
        }
  return xs;
}

}  // namespace

State DgSemidiscretization::interpolate(const FieldFunction& f, double t) const {
  const auto& xs = coords_;
  const std::size_t dim = grid_.dim;
  const std::size_t nodes = xs.size() / dim;
  State u(size_);
  for (std::size_t k = 0; k < nodes; ++k) f(t, &xs[k * dim], &u[k * nv_]);
  return u;
}

std::vector<double> DgSemidiscretization::integrals(const State& u) const {
  const std::size_t n = op_.n();
  const int dim = grid_.dim;
  std::vector<double> out(nv_, 0.0);
  for (int ey = 0; ey < (dim == 2 ? grid_.elements[1] : 1); ++ey)
    for (int ex = 0; ex < grid_.elements[0]; ++ex) {
      const std::size_t e = ex + static_cast<std::size_t>(grid_.elements[0]) * ey;
      double jac = 0.5 * grid_.width(0, ex);
      if (dim == 2) jac *= 0.5 * grid_.width(1, ey);
      for (std::size_t j = 0; j < (dim == 2 ? n : 1); ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const double w = op_.weights[i] * (dim == 2 ? op_.weights[j] : 1.0) * jac;
          const std::size_t node = i + n * j;
          for (std::size_t v = 0; v < nv_; ++v) out[v] += w * u[(e * npe_ + node) * nv_ + v];
        }
    }
  return out;
}

std::vector<double> DgSemidiscretization::l2_error(const State& u, const FieldFunction& f,
                                                   double t) const {
  const std::size_t n = op_.n();
  const int dim = grid_.dim;
  const LglOperator fine = LglOperator::make(2 * op_.p + 2);
  const std::size_t m = fine.n();
  std::vector<double> interp(m * n);
  for (std::size_t a = 0; a < m; ++a) {
    const auto l = op_.basis_at(fine.nodes[a]);
    std::copy(l.begin(), l.end(), interp.begin() + a * n);
  }
  std::vector<double> sum(nv_, 0.0), uh(nv_), ref(nv_), tmp(n * m * nv_);
  for (int ey = 0; ey < (dim == 2 ? grid_.elements[1] : 1); ++ey)
    for (int ex = 0; ex < grid_.elements[0]; ++ex) {
      const std::size_t e = ex + static_cast<std::size_t>(grid_.elements[0]) * ey;
      const double hx = grid_.width(0, ex);
      const double hy = dim == 2 ? grid_.width(1, ey) : 1.0;
      const double jac = 0.5 * hx * (dim == 2 ? 0.5 * hy : 1.0);
      const double* ue = &u[e * npe_ * nv_];
      // interpolate along x for every solution row j
      const std::size_t rows = dim == 2 ? n : 1;
      for (std::size_t j = 0; j < rows; ++j)
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t v = 0; v < nv_; ++v) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += interp[a * n + i] * ue[(i + n * j) * nv_ + v];
            tmp[(j * m + a) * nv_ + v] = s;
          }
      for (std::size_t b = 0; b < (dim == 2 ? m : 1); ++b)
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t v = 0; v < nv_; ++v) {
            if (dim == 2) {
              double s = 0.0;
              for (std::size_t j = 0; j < n; ++j) s += interp[b * n + j] * tmp[(j * m + a) * nv_ + v];
              uh[v] = s;
            } else {
              uh[v] = tmp[a * nv_ + v];
            }
          }
          double x[2];
          x[0] = grid_.breaks[0][ex] + 0.5 * (fine.nodes[a] + 1.0) * hx;
          x[1] = dim == 2 ? grid_.breaks[1][ey] + 0.5 * (fine.nodes[b] + 1.0) * hy : 0.0;
          f(t, x, ref.data());
          const double w = fine.weights[a] * (dim == 2 ? fine.weights[b] : 1.0) * jac;
          for (std::size_t v = 0; v < nv_; ++v) sum[v] += w * (uh[v] - ref[v]) * (uh[v] - ref[v]);
        }
    }
  for (double& s : sum) s = std::sqrt(s);
  return sum;
}

State DgSemidiscretization::exact(double t) const {
  if (!exact_) return Semidiscretization::exact(t);
  return interpolate(exact_, t);
}

std::vector<double> DgSemidiscretization::error(double t, const State& u) const {
  if (!exact_) return Semidiscretization::error(t, u);
  return l2_error(u, exact_, t);
}

// ---------------------------------------------------------------------------
// Strong-form DGSEM residual. On LGL nodes the strong and weak forms coincide
// (summation-by-parts), so this is the standard nodal DGSEM operator.

namespace {

template <int NV, class Phys>
void dg_residual(const Grid& g, const LglOperator& op, std::size_t npe, const Phys& phys,
                 const State& u, State& du) {
  const std::size_t n = op.n();
  const int dim = g.dim;
  const int Kx = g.elements[0];
  const int Ky = dim == 2 ? g.elements[1] : 1;
  const std::size_t lines = dim == 2 ? n : 1;
  std::fill(du.begin(), du.end(), 0.0);

  std::vector<std::array<double, NV>> f(n);
  std::array<double, NV> fL, fR, fs;
  const double w0 = op.weights[0];
  const double wN = op.weights[n - 1];

  auto at = [&](std::size_t e, std::size_t node) { return &u[(e * npe + node) * NV]; };
  auto dat = [&](std::size_t e, std::size_t node) { return &du[(e * npe + node) * NV]; };

  for (int d = 0; d < dim; ++d) {
    auto node_of = [&](std::size_t line, std::size_t k) {
      if (dim == 1) return k;
      return d == 0 ? k + n * line : line + n * k;
    };
    for (int ey = 0; ey < Ky; ++ey)
      for (int ex = 0; ex < Kx; ++ex) {
        const std::size_t e = ex + static_cast<std::size_t>(Kx) * ey;
        const double scale = 2.0 / g.width(d, d == 0 ? ex : ey);
        // volume term
        for (std::size_t l = 0; l < lines; ++l) {
          for (std::size_t k = 0; k < n; ++k) phys.flux(at(e, node_of(l, k)), d, f[k].data());
          for (std::size_t i = 0; i < n; ++i) {
            double* r = dat(e, node_of(l, i));
            const double* Drow = &op.D[i * n];
            for (int v = 0; v < NV; ++v) {
              double acc = 0.0;
              for (std::size_t k = 0; k < n; ++k) acc += Drow[k] * f[k][v];
              r[v] -= scale * acc;
            }
          }
        }
        // surface term on the interface to the right/top neighbour
        const int nx = d == 0 ? (ex + 1) % Kx : ex;
        const int ny = d == 1 ? (ey + 1) % Ky : ey;
        const std::size_t en = nx + static_cast<std::size_t>(Kx) * ny;
        const double scale_n = 2.0 / g.width(d, d == 0 ? nx : ny);
        for (std::size_t l = 0; l < lines; ++l) {
          const std::size_t iL = node_of(l, n - 1);
          const std::size_t iR = node_of(l, 0);
          const double* uL = at(e, iL);
          const double* uR = at(en, iR);
          phys.flux(uL, d, fL.data());
          phys.flux(uR, d, fR.data());
          phys.numflux(uL, uR, d, fs.data());
          double* rL = dat(e, iL);
          double* rR = dat(en, iR);
          for (int v = 0; v < NV; ++v) {
            rL[v] -= scale / wN * (fs[v] - fL[v]);
            rR[v] += scale_n / w0 * (fs[v] - fR[v]);
          }
        }
      }
  }
}

struct AdvectionPhysics {
  std::array<double, 2> a;
  void flux(const double* u, int d, double* f) const { f[0] = a[d] * u[0]; }
  void numflux(const double* uL, const double* uR, int d, double* f) const {
    f[0] = a[d] >= 0.0 ? a[d] * uL[0] : a[d] * uR[0];
  }
};

template <int DIM>
struct EulerPhysics {
  static constexpr int NV = DIM + 2;

  static void flux(const double* u, int d, double* f) {
    const double rho = u[0];
    const double vd = u[1 + d] / rho;
    const double p = EulerDg::pressure(u, DIM);
    f[0] = u[1 + d];
    for (int i = 0; i < DIM; ++i) f[1 + i] = u[1 + i] * vd + (i == d ? p : 0.0);
    f[DIM + 1] = (u[DIM + 1] + p) * vd;
  }

  static void numflux(const double* uL, const double* uR, int d, double* f) {
    double fl[NV], fr[NV];
    flux(uL, d, fl);
    flux(uR, d, fr);
    const double lam = std::max(EulerDg::max_speed(uL, DIM, d), EulerDg::max_speed(uR, DIM, d));
    for (int v = 0; v < NV; ++v) f[v] = 0.5 * (fl[v] + fr[v]) - 0.5 * lam * (uR[v] - uL[v]);
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Advection

AdvectionDg::AdvectionDg(Grid grid, int p, std::array<double, 2> a)
    : DgSemidiscretization(std::move(grid), p, 1), a_(a) {
  if (grid_.dim == 1) a_[1] = 0.0;
}

void AdvectionDg::rhs(double, const State& u, State& du) const {
  du.resize(size_);
  dg_residual<1>(grid_, op_, npe_, AdvectionPhysics{a_}, u, du);
}

double AdvectionDg::characteristic_time(const State&) const {
  const int Ky = grid_.dim == 2 ? grid_.elements[1] : 1;
  double tau = std::numeric_limits<double>::infinity();
  for (int ey = 0; ey < Ky; ++ey)
    for (int ex = 0; ex < grid_.elements[0]; ++ex) {
      double rate = std::abs(a_[0]) / grid_.width(0, ex);
      if (grid_.dim == 2) rate += std::abs(a_[1]) / grid_.width(1, ey);
      if (rate > 0.0) tau = std::min(tau, 1.0 / rate);
    }
  return tau;
}

// ---------------------------------------------------------------------------
// Euler

EulerDg::EulerDg(Grid grid, int p, FieldFunction source)
    : DgSemidiscretization(grid, p, grid.dim + 2), source_(std::move(source)) {}

double EulerDg::pressure(const double* u, int dim) {
  double kin = 0.0;
  for (int i = 0; i < dim; ++i) kin += u[1 + i] * u[1 + i];
  return (kGamma - 1.0) * (u[dim + 1] - 0.5 * kin / u[0]);
}

double EulerDg::max_speed(const double* u, int dim, int d) {
  const double p = pressure(u, dim);
  return std::abs(u[1 + d] / u[0]) + std::sqrt(kGamma * p / u[0]);
}

bool EulerDg::admissible(const State& u) const {
  const int dim = grid_.dim;
  for (std::size_t k = 0; k < size_; k += nv_) {
    const double* q = &u[k];
    if (!(q[0] > 0.0)) return false;
    const double p = pressure(q, dim);
    if (!(p > 0.0) || !std::isfinite(p)) return false;
  }
  return true;
}

void EulerDg::rhs(double t, const State& u, State& du) const {
  if (!admissible(u)) throw InadmissibleState("nonpositive density or pressure");
  du.resize(size_);
  if (grid_.dim == 1)
    dg_residual<3>(grid_, op_, npe_, EulerPhysics<1>{}, u, du);
  else
    dg_residual<4>(grid_, op_, npe_, EulerPhysics<2>{}, u, du);
  if (source_) {
    const auto& xs = coords_;
    const std::size_t dim = grid_.dim;
    std::vector<double> s(nv_);
    for (std::size_t k = 0; k < size_ / nv_; ++k) {
      source_(t, &xs[k * dim], s.data());
      for (std::size_t v = 0; v < nv_; ++v) du[k * nv_ + v] += s[v];
    }
  }
}

double EulerDg::characteristic_time(const State& u) const {
  const int dim = grid_.dim;
  double tau = std::numeric_limits<double>::infinity();
  for (int ey = 0; ey < (dim == 2 ? grid_.elements[1] : 1); ++ey)
    for (int ex = 0; ex < grid_.elements[0]; ++ex) {
      const std::size_t e = ex + static_cast<std::size_t>(grid_.elements[0]) * ey;
      for (std::size_t node = 0; node < npe_; ++node) {
        const double* q = &u[(e * npe_ + node) * nv_];
        double rate = max_speed(q, dim, 0) / grid_.width(0, ex);
        if (dim == 2) rate += max_speed(q, dim, 1) / grid_.width(1, ey);
        if (rate > 0.0) tau = std::min(tau, 1.0 / rate);
      }
    }
  return tau;
}

// ---------------------------------------------------------------------------

std::vector<double> assemble_linear_operator(const Semidiscretization& semi, double t) {
  const std::size_t n = semi.size();
  std::vector<double> M(n * n, 0.0);
  State e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    semi.rhs(t, e, col);
    for (std::size_t i = 0; i < n; ++i) M[i * n + j] = col[i];
    e[j] = 0.0;
  }
  return M;
}

std::vector<std::complex<double>> dense_eigenvalues(const std::vector<double>& A, std::size_t n) {
  Eigen::MatrixXd M(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) = A[i * n + j];
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue computation failed");
  const auto ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double cfl_sigma(int p) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(p); it != cache.end()) return it->second;
  AdvectionDg adv(Grid::uniform(1, {8, 1}, {0.0, 0.0}, {8.0, 1.0}), p, {1.0, 0.0});
  const auto M = assemble_linear_operator(adv);
  double worst = 0.0;
  for (const auto& lam : dense_eigenvalues(M, adv.size())) worst = std::max(worst, -lam.real());
  const double sigma = 2.0 / worst;
  cache[p] = sigma;
  return sigma;
}

}  // namespace lsrk
