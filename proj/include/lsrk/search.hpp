#pragma once

// Brute-force search over PID controller gains: candidates are pre-filtered by
// step size control stability, integrated on a problem suite and ranked by the
// max, median or 95th percentile of the evaluation counts.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lsrk/coefficients.hpp"
#include "lsrk/problems.hpp"
#include "lsrk/stability.hpp"
#include "lsrk/stepcontrol.hpp"

namespace lsrk {

/// Inclusive grid lo, lo + step, ..., hi.
struct GridRange {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.01;
  std::size_t size() const;
  double at(std::size_t i) const;
};

struct SearchSpace {
  GridRange beta1{0.10, 1.00, 0.01};
  GridRange beta2{-0.40, -0.05, 0.01};
  GridRange beta3{0.00, 0.10, 0.01};
  std::vector<double> tolerances{1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};

  std::size_t size() const { return beta1.size() * beta2.size() * beta3.size(); }
  /// Grid order: beta1 outermost, beta3 innermost.
  std::vector<Gains> candidates() const;
  static SearchSpace single(const Gains& beta, std::vector<double> tolerances);
};

struct StabilityFilter {
  std::vector<Gains> stable;
  std::vector<Gains> unstable;
  std::vector<Gains> indeterminate;  // scan failed; excluded
  std::vector<std::string> log;
};

/// Keeps the candidates whose control stability scan is stable.
StabilityFilter filter_stable(const Method& method, const std::vector<Gains>& candidates,
                              int n_points = 512);

/// A problem of the search suite with its own tolerances (empty: use the
/// space's list).
struct SearchProblem {
  Problem problem;
  std::vector<double> tolerances;
};

/// Suite member with the truncated optimization horizon: vortex2d t=4,
/// source1d t=20, advection2d t=20.
SearchProblem make_search_problem(std::string_view name, const ProblemOverrides& overrides = {});

struct RunCost {
  std::string problem;
  double tol = 0.0;
  double nfe = std::numeric_limits<double>::infinity();  // +inf on failure
  long rejected = 0;
  double error = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string failure;
};

struct CandidateResult {
  Gains beta{};
  std::vector<RunCost> runs;
  double max = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

struct SearchOptions {
  /// Cap on the number of integrations; 0 means no cap.
  std::size_t budget = 0;
  std::uint64_t seed = 1;
  int scan_points = 512;
  /// Always evaluated when stable, even if not in the subsample.
  std::vector<Gains> include;
};

struct SearchResult {
  std::string scheme;
  std::size_t grid_size = 0;
  std::size_t stable_count = 0;
  std::vector<Gains> indeterminate;
  std::vector<CandidateResult> candidates;  // evaluated, grid order
  std::vector<std::string> log;
};

class EmptyStableSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear-interpolated percentile of unsorted values (q in [0, 100]).
double percentile(std::vector<double> values, double q);
double median(std::vector<double> values);

/// Fills max, median and p95 from the run costs.
void aggregate(CandidateResult& c);

/// Deterministic subsample of `count` candidates: a shifted Halton sequence
/// in the unit cube, each point taking the nearest unused candidate.
std::vector<Gains> low_discrepancy_subsample(const std::vector<Gains>& pool, std::size_t count,
                                             std::uint64_t seed);

/// Single integration with fixed gains; failures give +inf cost.
RunCost evaluate_candidate(const Method& method, const Problem& problem, const Gains& beta,
                           double tol);

SearchResult run_search(const Method& method, const std::vector<SearchProblem>& problems,
                        const SearchSpace& space, const SearchOptions& opts = {});

enum class Policy { MinMax, MinMedian, MinP95 };
Policy parse_policy(std::string_view s);
std::string_view to_string(Policy p);

/// Candidates ordered by the policy aggregate, ties broken by larger beta1,
/// then smaller |beta2|, then smaller beta3. Throws EmptyStableSetError.
std::vector<CandidateResult> recommend(const SearchResult& result, Policy policy);

/// Smallest #FE among the evaluated candidates for one problem and tolerance.
double grid_minimum(const SearchResult& result, std::string_view problem, double tol);
/// #FE of a given candidate (exact match on beta), +inf if not evaluated.
double candidate_cost(const SearchResult& result, const Gains& beta, std::string_view problem,
                      double tol);

}  // namespace lsrk
