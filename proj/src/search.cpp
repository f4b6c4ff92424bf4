#include "lsrk/search.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <tuple>

#include "lsrk/integrators.hpp"

namespace lsrk {

namespace {

bool same(const Gains& a, const Gains& b) {
  for (int i = 0; i < 3; ++i)
    if (std::abs(a[i] - b[i]) > 1e-12) return false;
  return true;
}

bool grid_less(const Gains& a, const Gains& b) {
  return std::tie(a[0], a[1], a[2]) < std::tie(b[0], b[1], b[2]);
}

std::string fmt_gains(const Gains& b) {
  std::ostringstream os;
  os << '(' << b[0] << ',' << b[1] << ',' << b[2] << ')';
  return os.str();
}

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

std::size_t GridRange::size() const {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("grid range needs step > 0 and hi >= lo");
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

double GridRange::at(std::size_t i) const {
  // steps like 0.01 are applied as integer/100 so grid values print cleanly
  const double n = std::round(1.0 / step);
  if (std::abs(n * step - 1.0) < 1e-12 && std::abs(lo * n - std::round(lo * n)) < 1e-9)
    return (std::round(lo * n) + static_cast<double>(i)) / n;
  return lo + static_cast<double>(i) * step;
}

std::vector<Gains> SearchSpace::candidates() const {
  std::vector<Gains> out;
  out.reserve(size());
  for (std::size_t i = 0; i < beta1.size(); ++i)
    for (std::size_t j = 0; j < beta2.size(); ++j)
      for (std::size_t l = 0; l < beta3.size(); ++l)
        out.push_back({beta1.at(i), beta2.at(j), beta3.at(l)});
  return out;
}

SearchSpace SearchSpace::single(const Gains& beta, std::vector<double> tolerances) {
  SearchSpace s;
  s.beta1 = {beta[0], beta[0], 1.0};
  s.beta2 = {beta[1], beta[1], 1.0};
  s.beta3 = {beta[2], beta[2], 1.0};
  s.tolerances = std::move(tolerances);
  return s;
}

StabilityFilter filter_stable(const Method& method, const std::vector<Gains>& candidates,
                              int n_points) {
  StabilityFilter out;
  const int k = method_orders(method).k();
  ControlScanGeometry geom;
  try {
    geom = control_scan_geometry(stability_polynomials(method), n_points);
  } catch (const std::exception& e) {
    out.indeterminate = candidates;
    out.log.push_back(std::string("stability scan failed for every candidate: ") + e.what());
    return out;
  }
  if (!geom.degenerate.empty())
    out.log.push_back(std::to_string(geom.degenerate.size()) + " degenerate boundary samples skipped");
  if (geom.z.empty()) {
    out.indeterminate = candidates;
    out.log.push_back("no non-degenerate boundary samples");
    return out;
  }
  for (const auto& beta : candidates) {
    try {
      if (control_stable(geom, beta, k))
        out.stable.push_back(beta);
      else
        out.unstable.push_back(beta);
    } catch (const std::exception& e) {
      out.indeterminate.push_back(beta);
      out.log.push_back("indeterminate " + fmt_gains(beta) + ": " + e.what());
    }
  }
  return out;
}

SearchProblem make_search_problem(std::string_view name, const ProblemOverrides& overrides) {
  ProblemOverrides o = overrides;
  if (!o.t_end) {
    if (name == "vortex2d") o.t_end = 4.0;
    if (name == "source1d") o.t_end = 20.0;
    if (name == "advection2d") o.t_end = 20.0;
  }
  return {make_problem(name, o), {}};
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("percentile of an empty set");
  if (q < 0.0 || q > 100.0) throw std::invalid_argument("percentile outside [0, 100]");
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double f = pos - static_cast<double>(lo);
  if (lo == hi || f == 0.0) return v[lo];
  if (std::isinf(v[hi])) return v[hi];
  return v[lo] + f * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return percentile(std::move(v), 50.0); }

void aggregate(CandidateResult& c) {
  std::vector<double> costs;
  for (const auto& r : c.runs) costs.push_back(r.nfe);
  if (costs.empty()) {
    c.max = c.median = c.p95 = std::numeric_limits<double>::infinity();
    return;
  }
  c.max = *std::max_element(costs.begin(), costs.end());
  c.median = median(costs);
  c.p95 = percentile(costs, 95.0);
}

std::vector<Gains> low_discrepancy_subsample(const std::vector<Gains>& pool, std::size_t count,
                                             std::uint64_t seed) {
  if (count >= pool.size()) return pool;
  Gains lo = pool.front(), hi = pool.front();
  for (const auto& g : pool)
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], g[d]);
      hi[d] = std::max(hi[d], g[d]);
    }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const std::array<double, 3> shift{uni(rng), uni(rng), uni(rng)};
  const std::array<unsigned, 3> bases{2, 3, 5};
  std::vector<char> used(pool.size(), 0);
  std::vector<std::size_t> picked;
  for (std::uint64_t i = 1; picked.size() < count; ++i) {
    std::array<double, 3> p{};
    for (int d = 0; d < 3; ++d) {
      double x = radical_inverse(i, bases[d]) + shift[d];
      x -= std::floor(x);
      p[d] = lo[d] + x * (hi[d] - lo[d]);
    }
    std::size_t best = pool.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < pool.size(); ++n) {
      if (used[n]) continue;
      double d2 = 0.0;
      for (int d = 0; d < 3; ++d) {
        const double span = hi[d] > lo[d] ? hi[d] - lo[d] : 1.0;
        const double t = (pool[n][d] - p[d]) / span;
        d2 += t * t;
      }
      if (d2 < best_d) {
        best_d = d2;
        best = n;
      }
    }
    used[best] = 1;
    picked.push_back(best);
  }
  std::sort(picked.begin(), picked.end());
  std::vector<Gains> out;
  for (auto n : picked) out.push_back(pool[n]);
  return out;
}

RunCost evaluate_candidate(const Method& method, const Problem& problem, const Gains& beta,
                           double tol) {
  RunCost rc;
  rc.problem = problem.name;
  rc.tol = tol;
  ControllerConfig cfg;
  cfg.beta1 = beta[0];
  cfg.beta2 = beta[1];
  cfg.beta3 = beta[2];
  cfg.atol = cfg.rtol = tol;
  cfg.k = method_orders(method).k();
  try {
    const RunReport r = integrate(method, *problem.rhs, cfg, problem.t0, problem.t_end, problem.u0);
    rc.nfe = static_cast<double>(r.total_nfe());
    rc.rejected = r.rejected;
    if (!r.error.empty()) rc.error = *std::max_element(r.error.begin(), r.error.end());
    rc.ok = true;
  } catch (const IntegrationAborted& e) {
    rc.rejected = e.report().rejected;
    rc.failure = e.what();
  } catch (const std::runtime_error& e) {
    rc.failure = e.what();
  }
  return rc;
}

SearchResult run_search(const Method& method, const std::vector<SearchProblem>& problems,
                        const SearchSpace& space, const SearchOptions& opts) {
  if (problems.empty()) throw std::invalid_argument("search needs at least one problem");
  SearchResult res;
  res.scheme = method_name(method);
  const auto grid = space.candidates();
  res.grid_size = grid.size();

  StabilityFilter filt = filter_stable(method, grid, opts.scan_points);
  res.indeterminate = filt.indeterminate;
  res.log = filt.log;
  std::vector<Gains> stable = filt.stable;

  // extra candidates off the grid go through the same filter
  std::vector<Gains> forced;
  for (const auto& g : opts.include) {
    const bool on_grid = std::any_of(grid.begin(), grid.end(), [&](const Gains& c) { return same(c, g); });
    if (on_grid) {
      if (std::any_of(stable.begin(), stable.end(), [&](const Gains& c) { return same(c, g); }))
        forced.push_back(g);
      else
        res.log.push_back("included candidate " + fmt_gains(g) + " is not control-stable; skipped");
      continue;
    }
    const auto extra = filter_stable(method, {g}, opts.scan_points);
    if (!extra.stable.empty()) {
      forced.push_back(g);
      stable.push_back(g);
    } else {
      res.log.push_back("included candidate " + fmt_gains(g) + " is not control-stable; skipped");
    }
  }
  res.stable_count = stable.size();

  std::size_t runs_per_candidate = 0;
  for (const auto& p : problems)
    runs_per_candidate += p.tolerances.empty() ? space.tolerances.size() : p.tolerances.size();
  if (runs_per_candidate == 0) throw std::invalid_argument("search has no tolerances");

  std::vector<Gains> chosen = stable;
  if (opts.budget > 0 && stable.size() * runs_per_candidate > opts.budget) {
    const std::size_t count = std::max<std::size_t>(opts.budget / runs_per_candidate, forced.size());
    std::vector<Gains> pool;
    for (const auto& g : stable)
      if (std::none_of(forced.begin(), forced.end(), [&](const Gains& f) { return same(f, g); }))
        pool.push_back(g);
    chosen = low_discrepancy_subsample(pool, count - forced.size(), opts.seed);
    chosen.insert(chosen.end(), forced.begin(), forced.end());
    res.log.push_back("budget " + std::to_string(opts.budget) + ": evaluating " +
                      std::to_string(chosen.size()) + " of " + std::to_string(stable.size()) +
                      " stable candidates");
  }
  std::sort(chosen.begin(), chosen.end(), grid_less);
  chosen.erase(std::unique(chosen.begin(), chosen.end(), same), chosen.end());

  for (const auto& beta : chosen) {
    CandidateResult c;
    c.beta = beta;
    for (const auto& p : problems) {
      const auto& tols = p.tolerances.empty() ? space.tolerances : p.tolerances;
      for (double tol : tols) c.runs.push_back(evaluate_candidate(method, p.problem, beta, tol));
    }
    aggregate(c);
    res.candidates.push_back(std::move(c));
  }
  return res;
}

Policy parse_policy(std::string_view s) {
  if (s == "min-max") return Policy::MinMax;
  if (s == "min-median") return Policy::MinMedian;
  if (s == "min-p95") return Policy::MinP95;
  throw std::invalid_argument("unknown policy '" + std::string(s) +
                              "' (expected min-max, min-median or min-p95)");
}

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::MinMax: return "min-max";
    case Policy::MinMedian: return "min-median";
    case Policy::MinP95: return "min-p95";
  }
  return "?";
}

std::vector<CandidateResult> recommend(const SearchResult& result, Policy policy) {
  if (result.candidates.empty())
    throw EmptyStableSetError("no control-stable controller candidates for " + result.scheme +
                              ": step size control stability cannot be achieved on this grid");
  auto key = [policy](const CandidateResult& c) {
    switch (policy) {
      case Policy::MinMax: return c.max;
      case Policy::MinMedian: return c.median;
      case Policy::MinP95: return c.p95;
    }
    return c.max;
  };
  std::vector<CandidateResult> out = result.candidates;
  std::stable_sort(out.begin(), out.end(), [&](const CandidateResult& a, const CandidateResult& b) {
    const double ka = key(a), kb = key(b);
    if (ka != kb) return ka < kb;
    if (a.beta[0] != b.beta[0]) return a.beta[0] > b.beta[0];
    if (std::abs(a.beta[1]) != std::abs(b.beta[1])) return std::abs(a.beta[1]) < std::abs(b.beta[1]);
    return a.beta[2] < b.beta[2];
  });
  return out;
}

double grid_minimum(const SearchResult& result, std::string_view problem, double tol) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : result.candidates)
    for (const auto& r : c.runs)
      if (r.problem == problem && r.tol == tol) best = std::min(best, r.nfe);
  return best;
}

double candidate_cost(const SearchResult& result, const Gains& beta, std::string_view problem,
                      double tol) {
  for (const auto& c : result.candidates)
    if (same(c.beta, beta))
      for (const auto& r : c.runs)
        if (r.problem == problem && r.tol == tol) return r.nfe;
  return std::numeric_limits<double>::infinity();
}

}  // namespace lsrk
