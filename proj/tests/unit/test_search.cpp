#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "lsrk/integrators.hpp"
#include "lsrk/search.hpp"

using namespace lsrk;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CandidateResult with_costs(Gains beta, std::vector<double> nfe) {
  CandidateResult c;
  c.beta = beta;
  for (double n : nfe) {
    RunCost r;
    r.nfe = n;
    r.ok = std::isfinite(n);
    c.runs.push_back(r);
  }
  aggregate(c);
  return c;
}

SearchResult result_of(std::vector<CandidateResult> cs) {
  SearchResult r;
  r.candidates = std::move(cs);
  return r;
}

}  // namespace

TEST_CASE("search grid") {
  const SearchSpace sp;
  CHECK(sp.beta1.size() == 91);
  CHECK(sp.beta2.size() == 36);
  CHECK(sp.beta3.size() == 11);
  CHECK(sp.size() == 91 * 36 * 11);
  const auto c = sp.candidates();
  REQUIRE(c.size() == sp.size());
  CHECK(c.front() == Gains{0.10, -0.40, 0.00});
  CHECK(c.back() == Gains{1.00, -0.05, 0.10});
  CHECK(c[1] == Gains{0.10, -0.40, 0.01});
  // grid values are exact decimal roundings, so catalog gains match bitwise
  CHECK(std::set<Gains>(c.begin(), c.end()).count(Gains{0.70, -0.23, 0.0}) == 1);
  CHECK(std::set<Gains>(c.begin(), c.end()).count(Gains{0.28, -0.23, 0.0}) == 1);
  CHECK(sp.tolerances.size() == 8);
  CHECK(GridRange{0.0, 1.0, 0.25}.size() == 5);
  // a one-point range keeps its value whatever the step
  CHECK(GridRange{0.70, 0.70, 1.0}.at(0) == 0.70);
}

TEST_CASE("aggregates") {
  const auto a = with_costs({0.5, -0.2, 0}, {10, 20});
  const auto b = with_costs({0.6, -0.2, 0}, {15, 15});
  CHECK(a.median == 15.0);
  CHECK(b.median == 15.0);
  CHECK(a.max == 20.0);
  CHECK(percentile({1, 2, 3, 4, 5}, 95) == doctest::Approx(4.8));
  CHECK(percentile({7}, 95) == 7.0);
  CHECK(median({3, 1, 2}) == 2.0);
  const auto f = with_costs({0.5, -0.2, 0}, {10, kInf});
  CHECK(std::isinf(f.max));
}

TEST_CASE("recommendation policy") {
  SUBCASE("single candidate") {
    const auto r = recommend(result_of({with_costs({0.3, -0.1, 0}, {100})}), Policy::MinMax);
    REQUIRE(r.size() == 1);
    CHECK(r[0].beta == Gains{0.3, -0.1, 0});
  }
  SUBCASE("ties prefer larger beta1, then smaller |beta2|, then smaller beta3") {
    const auto r = recommend(result_of({with_costs({0.3, -0.1, 0.0}, {100}), with_costs({0.5, -0.3, 0.0}, {100}),
                                        with_costs({0.5, -0.2, 0.05}, {100}), with_costs({0.5, -0.2, 0.01}, {100}),
                                        with_costs({0.9, -0.1, 0.0}, {101})}),
                             Policy::MinMax);
    CHECK(r[0].beta == Gains{0.5, -0.2, 0.01});
    CHECK(r[1].beta == Gains{0.5, -0.2, 0.05});
    CHECK(r[2].beta == Gains{0.5, -0.3, 0.0});
    CHECK(r[3].beta == Gains{0.3, -0.1, 0.0});
    CHECK(r[4].beta == Gains{0.9, -0.1, 0.0});
  }
  SUBCASE("policies rank by their own statistic") {
    const auto res = result_of({with_costs({0.3, -0.1, 0}, {10, 10, 50}), with_costs({0.4, -0.1, 0}, {30, 30, 30})});
    CHECK(recommend(res, Policy::MinMax)[0].beta[0] == 0.4);
    CHECK(recommend(res, Policy::MinMedian)[0].beta[0] == 0.3);
  }
  CHECK_THROWS_AS(recommend(SearchResult{}, Policy::MinMax), EmptyStableSetError);
  CHECK(parse_policy("min-p95") == Policy::MinP95);
  CHECK(to_string(Policy::MinMedian) == "min-median");
  CHECK_THROWS_AS(parse_policy("best"), std::invalid_argument);
}

TEST_CASE("low-discrepancy subsample") {
  const SearchSpace sp;
  const auto pool = sp.candidates();
  const auto a = low_discrepancy_subsample(pool, 200, 3);
  const auto b = low_discrepancy_subsample(pool, 200, 3);
  const auto c = low_discrepancy_subsample(pool, 200, 4);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(std::set<Gains>(a.begin(), a.end()).size() == 200);
  // spread over the beta1 range
  double lo = 1e9, hi = -1e9;
  for (const auto& g : a) {
    lo = std::min(lo, g[0]);
    hi = std::max(hi, g[0]);
  }
  CHECK(lo < 0.2);
  CHECK(hi > 0.9);
  CHECK(low_discrepancy_subsample(pool, pool.size() + 5, 1).size() == pool.size());
}

TEST_CASE("stability filter") {
  const auto m = catalog_get("bs5");
  const auto f = filter_stable(m, {{0.70, -0.40, 0.0}, {0.28, -0.23, 0.0}, {0.0, 0.0, 0.0}});
  REQUIRE(f.stable.size() == 1);
  CHECK(f.stable[0] == Gains{0.28, -0.23, 0.0});
  CHECK(f.unstable.size() == 2);
}

TEST_CASE("single-candidate search reproduces a direct integration") {
  const Method m = catalog_get("rk35-3s+fsal");
  const SearchProblem sp = make_search_problem("source1d", {.elements = 8, .t_end = 2.0});
  const Gains beta{0.70, -0.23, 0.0};
  const auto res = run_search(m, {sp}, SearchSpace::single(beta, {1e-5}));
  REQUIRE(res.candidates.size() == 1);
  ControllerConfig c;
  c.beta1 = beta[0];
  c.beta2 = beta[1];
  c.beta3 = beta[2];
  c.atol = c.rtol = 1e-5;
  c.k = method_orders(m).k();
  const auto direct = integrate(m, *sp.problem.rhs, c, sp.problem.t0, sp.problem.t_end, sp.problem.u0);
  CHECK(res.candidates[0].runs[0].nfe == double(direct.total_nfe()));
  CHECK(res.candidates[0].runs[0].rejected == direct.rejected);
  CHECK(candidate_cost(res, beta, "source1d", 1e-5) == double(direct.total_nfe()));
  CHECK(std::isinf(candidate_cost(res, {0.1, -0.1, 0.0}, "source1d", 1e-5)));
}

TEST_CASE("search is deterministic and only evaluates stable gains") {
  const Method m = catalog_get("bs3");
  const SearchProblem sp = make_search_problem("source1d", {.elements = 6, .t_end = 1.0});
  SearchSpace space;
  space.beta1 = {0.50, 0.70, 0.10};
  space.beta2 = {-0.30, -0.10, 0.10};
  space.beta3 = {0.00, 0.05, 0.05};
  space.tolerances = {1e-4};
  const auto a = run_search(m, {sp}, space);
  const auto b = run_search(m, {sp}, space);
  REQUIRE(a.candidates.size() == b.candidates.size());
  CHECK(a.grid_size == 18);
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    CHECK(a.candidates[i].beta == b.candidates[i].beta);
    CHECK(a.candidates[i].max == b.candidates[i].max);
  }
  const auto geom = control_scan_geometry(stability_polynomials(m), 512);
  for (const auto& c : recommend(a, Policy::MinMax)) CHECK(control_stable(geom, c.beta, method_orders(m).k()));
}

TEST_CASE("an uncontrollable pair has an empty stable set") {
  // forward Euler with a trivial estimator: E = 0 everywhere, nothing is scannable
  ButcherPair fe;
  fe.name = "euler-flat";
  fe.s = 1;
  fe.A = {0.0};
  fe.b = {1.0};
  fe.c = {0.0};
  fe.bhat = {1.0, 0.0};
  fe.q = fe.qhat = 1;
  SearchSpace space;
  space.beta1 = {0.5, 0.6, 0.1};
  space.beta2 = {-0.2, -0.2, 0.01};
  space.beta3 = {0.0, 0.0, 0.01};
  space.tolerances = {1e-3};
  const auto res = run_search(fe, {make_search_problem("source1d", {.elements = 4, .t_end = 0.1})}, space);
  CHECK(res.candidates.empty());
  CHECK_THROWS_AS(recommend(res, Policy::MinMax), EmptyStableSetError);
}

TEST_CASE("tuned BS3(2)3 gains are competitive with a subsampled search") {
  const Method m = catalog_get("bs3");
  const std::vector<SearchProblem> suite{make_search_problem("vortex2d", {.elements = 10}),
                                         make_search_problem("source1d")};
  SearchSpace space;
  space.tolerances = {1e-5};
  SearchOptions o;
  o.budget = 120;
  o.include = {Gains{0.60, -0.20, 0.0}};
  const auto res = run_search(m, suite, space, o);
  const auto best = recommend(res, Policy::MinMax).front();
  double tuned = 0.0;
  for (const auto& c : res.candidates)
    if (c.beta == Gains{0.60, -0.20, 0.0}) tuned = c.max;
  REQUIRE(tuned > 0.0);
  MESSAGE("best (" << best.beta[0] << ", " << best.beta[1] << ", " << best.beta[2] << ") max " << best.max
                   << ", tuned max " << tuned);
  CHECK(tuned <= 1.10 * best.max);
}
