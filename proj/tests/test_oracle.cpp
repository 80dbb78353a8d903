#include <doctest.h>

#include <cmath>
#include <random>

#include "qodc/errors.hpp"
#include "qodc/oracle.hpp"

using namespace qodc;

namespace {

MarketConfig market_with(std::vector<DeviceType> types, double alpha = 0.75) {
  return MarketConfig(40, 100.0, alpha, SlotConfig(24e3, 24e6), FreshnessCaps(0.95, 0.73),
                      std::move(types));
}

double spacing(const std::vector<double>& g) {
  return (g.back() - g.front()) / static_cast<double>(g.size() - 1);
}

void check_exhaustively(const OracleResult& res, const MarketConfig& market) {
  const auto ir = check_ir(res.best_contract, market.types);
  for (bool b : ir) CHECK(b);
  CHECK(check_ic(res.best_contract, market.types).all());
  CHECK(is_feasible(res.best_contract, market.types));
  CHECK(res.feasible_count <= res.evaluated_count);
  CHECK(res.best_utility == bs_utility(res.best_contract, market));
}

}  // namespace

TEST_CASE("two-candidate grid") {
  const auto market = market_with({{2.0, 1.0}});
  const GridSpec grid{{0.5}, {0.25, 1.0}};
  const auto res = solve_grid(market, grid);
  CHECK(res.best_contract == Contract{{{0.5, 0.25}}});
  CHECK(res.evaluated_count == 2);
  CHECK(res.feasible_count == 2);
  const double q = item_qod({0.5, 0.25}, market);
  CHECK(res.best_utility == doctest::Approx(40 * (100 * q - 0.25)).epsilon(1e-14));
}

TEST_CASE("matches a naive enumeration on small grids") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> phi1(1, 8), phi2(8, 15), q(0.05, 0.95);
  for (int trial = 0; trial < 5; ++trial) {
    const double q1 = q(rng);
    const auto market = market_with({{phi1(rng), q1}, {phi2(rng), 1 - q1}});
    const auto grid = GridSpec::uniform(0.01, 1.0, 9, 2.0, 11);
    const auto res = solve_grid(market, grid);

    double best = -1e300;
    Contract arg;
    std::uint64_t feasible = 0;
    for (double f1 : grid.f_grid)
      for (double r1 : grid.r_grid)
        for (double f2 : grid.f_grid)
          for (double r2 : grid.r_grid) {
            const Contract c{{{f1, r1}, {f2, r2}}};
            if (!is_feasible(c, market.types)) continue;
            ++feasible;
            const double u = bs_utility(c, market);
            if (u > best) {
              best = u;
              arg = c;
            }
          }
    CHECK(res.feasible_count == feasible);
    CHECK(res.best_utility == best);
    CHECK(res.best_contract == arg);
    check_exhaustively(res, market);
  }
}

TEST_CASE("IR binds at the single-type optimum") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> phi(1, 15);
  for (int trial = 0; trial < 10; ++trial) {
    const auto market = market_with({{phi(rng), 1.0}});
    const auto grid = GridSpec::uniform(0.01, 1.0, 64, 2.0, 64);
    const auto res = solve_grid(market, grid);
    const auto& item = res.best_contract.items[0];
    const double gap = item.reward - item.update_frequency / market.types[0].phi;
    CHECK(gap >= -kConstraintTolerance);
    CHECK(gap <= spacing(grid.r_grid));
    check_exhaustively(res, market);

    const auto refined = refine(market, res, 0.25, 3);
    const auto& ritem = refined.best_contract.items[0];
    const double rgap = ritem.reward - ritem.update_frequency / market.types[0].phi;
    CHECK(rgap <= spacing(refined.grids[0].r_grid));
    CHECK(rgap <= gap + 1e-12);
    CHECK(refined.best_utility >= res.best_utility);
  }
}

TEST_CASE("a zero-probability type leaves item 1 at the single-type optimum") {
  const auto grid = GridSpec::uniform(0.01, 1.0, 24, 2.0, 24);
  const auto single = solve_grid(market_with({{3.0, 1.0}}), grid);
  const auto pair = solve_grid(market_with({{3.0, 1.0}, {11.0, 0.0}}), grid);
  CHECK(pair.best_contract.items[0] == single.best_contract.items[0]);
  CHECK(pair.best_utility == doctest::Approx(single.best_utility).epsilon(1e-14));
}

TEST_CASE("refinement never loses utility and keeps feasibility") {
  const auto market = market_with({{2.0, 0.84}, {12.0, 0.16}});
  const auto seed = solve_grid(market, GridSpec::uniform(0.01, 1.0, 32, 2.0, 32));
  double prev = seed.best_utility;
  OracleResult cur = seed;
  for (int round = 0; round < 3; ++round) {
    cur = refine(market, cur, 0.5, 1);
    CHECK(cur.best_utility >= prev);
    check_exhaustively(cur, market);
    prev = cur.best_utility;
  }
  // Unit shrink keeps the lattice, so nothing better appears.
  const auto same = refine(market, seed, 1.0, 1);
  CHECK(same.best_utility == doctest::Approx(seed.best_utility).epsilon(1e-12));
  CHECK(same.best_contract.items[0].update_frequency ==
        doctest::Approx(seed.best_contract.items[0].update_frequency).epsilon(1e-12));
  CHECK_THROWS_AS(refine(market, seed, 0.5, 0), InvalidArgument);
}

TEST_CASE("adding grid points never lowers the optimum") {
  const auto market = market_with({{4.0, 0.5}, {10.0, 0.5}});
  const auto coarse = solve_grid(market, GridSpec::uniform(0.01, 1.0, 12, 2.0, 12));
  // Every coarse point reappears: 23 = 2 * 12 - 1 points on the same span.
  const auto fine = solve_grid(market, GridSpec::uniform(0.01, 1.0, 23, 2.0, 23));
  CHECK(fine.best_utility >= coarse.best_utility - 1e-9);
}

TEST_CASE("grid guard and infeasible grids") {
  const auto market = market_with({{2.0, 0.5}, {12.0, 0.5}});
  CHECK_THROWS_AS(solve_grid(market, GridSpec::uniform(0.01, 1.0, 101, 2.0, 101)), GridTooLarge);
  // Rewards too small for any positive frequency.
  const auto one = market_with({{1.0, 1.0}});
  CHECK_THROWS_AS(solve_grid(one, GridSpec{{0.5, 1.0}, {0.0, 0.1}}), NoFeasiblePoint);
  CHECK_THROWS_AS(solve_grid(one, GridSpec{{0.5, 0.4}, {0.0, 1.0}}), InvalidArgument);
}

TEST_CASE("deterministic") {
  const auto market = market_with({{2.5, 0.4}, {9.0, 0.6}});
  OracleOptions opts;
  opts.f_points = opts.r_points = 24;
  const auto a = solve(market, opts);
  const auto b = solve(market, opts);
  CHECK(a.best_contract == b.best_contract);
  CHECK(a.best_utility == b.best_utility);
  check_exhaustively(a, market);
}
