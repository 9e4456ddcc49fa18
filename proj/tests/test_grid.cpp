#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "recdp/errors.hpp"
#include "recdp/grid.hpp"

using namespace recdp;

namespace {

const std::vector<double> kSizeList = {10,  14,  20,  28,  40,   57,  80, 113,
                                       160, 226, 320, 452, 640,  905, 1809};
const std::vector<double> kIterList = {1,  2,  3,  4,  6,  8,  11,
                                       16, 23, 32, 45, 64, 91, 128};

}  // namespace

TEST_CASE("resolve_dimension: explicit list passes through") {
  const auto v = resolve_dimension(DimensionSpec::explicit_values({3, 1, 4}));
  CHECK(v == std::vector<double>{3, 1, 4});
}

TEST_CASE("resolve_dimension: exponential generator rounds and dedupes") {
  // 2^0 .. 2^2 step 0.5, rounded: 1 1 2 3 4 -> dedupe 1 2 3 4
  const auto v = resolve_dimension(DimensionSpec::exponential(0.0, 2.0, 0.5, true));
  CHECK(v == std::vector<double>{1, 2, 3, 4});
  // 2^3.321 rounds to 10
  const auto w = resolve_dimension(DimensionSpec::exponential(3.321, 3.321, 1.0, true));
  CHECK(w == std::vector<double>{10});
  // descending direction works too
  const auto d = resolve_dimension(DimensionSpec::exponential(3.0, 1.0, -1.0, true));
  CHECK(d == std::vector<double>{8, 4, 2});
}

TEST_CASE("resolve_dimension: empty dimension is a config error") {
  DimensionSpec s;  // no values, zero step
  CHECK_THROWS_AS(resolve_dimension(s), ConfigError);
}

TEST_CASE("default grid: published dimension lists") {
  const GridSpec bpr = paper_default_grid(Algo::bpr_mf);
  CHECK(resolve_dimension(bpr.factors) == kSizeList);
  CHECK(resolve_dimension(bpr.iterations) == kIterList);

  const auto lr = resolve_dimension(bpr.learning_rate);
  REQUIRE(lr.size() == 15);
  CHECK(lr[0] == 0.200003894816316);
  for (std::size_t e = 1; e < lr.size(); ++e)
    CHECK(lr[e] == lr[e - 1] / 2.0);  // halving is exact in binary
  CHECK(lr.back() == doctest::Approx(1.220726897e-05).epsilon(1e-9));
  // lr[0] is within rounding of 2^-2.3219
  CHECK(std::fabs(std::log2(lr[0]) + 2.3219) < 1e-4);

  const GridSpec uk = paper_default_grid(Algo::user_knn);
  CHECK(resolve_dimension(uk.neighbors) == kSizeList);
}

TEST_CASE("build_grid: cardinalities and ordering") {
  const auto knn = build_grid(paper_default_grid(Algo::item_knn));
  CHECK(knn.size() == 15);
  for (std::size_t e = 0; e < knn.size(); ++e) {
    CHECK(knn[e].algo == Algo::item_knn);
    CHECK(knn[e].neighbors == static_cast<int>(kSizeList[e]));
  }

  const auto bpr = build_grid(paper_default_grid(Algo::bpr_mf));
  CHECK(bpr.size() == 15 * 14 * 15);  // 3150
  // factors-major: first 14*15 entries share factors=10
  for (std::size_t e = 0; e < 14 * 15; ++e) CHECK(bpr[e].factors == 10);
  CHECK(bpr[14 * 15].factors == 14);
  // within a factors block, iterations-major over learning rates
  CHECK(bpr[0].iterations == 1);
  CHECK(bpr[15].iterations == 2);
  CHECK(bpr[1].learning_rate == bpr[0].learning_rate / 2.0);
  // all ids distinct
  std::set<std::string> ids;
  for (const auto& c : bpr) ids.insert(c.id());
  CHECK(ids.size() == bpr.size());
}

TEST_CASE("subgrid_around_best: radius windows clip at the bounds") {
  const GridSpec spec = paper_default_grid(Algo::user_knn);
  HyperConfig best;
  best.algo = Algo::user_knn;
  best.neighbors = 10;  // at the lower bound
  auto s0 = subgrid_around_best(spec, best, {0});
  REQUIRE(s0.size() == 1);
  CHECK(s0[0].neighbors == 10);
  auto s2 = subgrid_around_best(spec, best, {2});
  REQUIRE(s2.size() == 3);  // clipped: {10, 14, 20}
  CHECK(s2[0].neighbors == 10);
  CHECK(s2[2].neighbors == 20);

  best.neighbors = 160;  // interior
  auto s1 = subgrid_around_best(spec, best, {1});
  REQUIRE(s1.size() == 3);
  CHECK(s1[0].neighbors == 113);
  CHECK(s1[1].neighbors == 160);
  CHECK(s1[2].neighbors == 226);
}

TEST_CASE("subgrid_around_best: bpr uses one radius per dimension") {
  const GridSpec spec = paper_default_grid(Algo::bpr_mf);
  const auto grid = build_grid(spec);
  const HyperConfig best = grid[grid.size() / 2];
  const auto sub = subgrid_around_best(spec, best, {1, 1, 0});
  // 3 factors x 3 iterations x 1 learning rate (all interior here)
  CHECK(sub.size() == 9);
  for (const auto& c : sub) CHECK(c.learning_rate == best.learning_rate);
}

TEST_CASE("pair sampling: determinism, distinctness, canonical order") {
  const auto grid = build_grid(paper_default_grid(Algo::user_knn));
  const std::size_t universe = pair_universe_size(grid, std::nullopt);
  CHECK(universe == 15 * 14 / 2);

  const PairSample a = sample_pairs(grid, 25, 99);
  const PairSample b = sample_pairs(grid, 25, 99);
  CHECK(a.pairs == b.pairs);
  CHECK(a.seed == 99);

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [x, y] : a.pairs) {
    CHECK(x < y);
    CHECK(y < grid.size());
    seen.insert({x, y});
  }
  CHECK(seen.size() == 25);

  const PairSample c = sample_pairs(grid, 25, 100);
  CHECK(a.pairs != c.pairs);

  // m = universe returns every pair
  const PairSample all = sample_pairs(grid, universe, 7);
  CHECK(all.pairs.size() == universe);
}

TEST_CASE("pair sampling: oversized request is a config error") {
  const auto grid = build_grid(paper_default_grid(Algo::user_knn));
  CHECK_THROWS_AS(sample_pairs(grid, 15 * 14 / 2 + 1, 1), ConfigError);
}

TEST_CASE("pair sampling: constrained universe") {
  const auto grid = build_grid(paper_default_grid(Algo::bpr_mf));
  PairConstraint c{GridDim::factors, 40.0};
  // 14 * 15 = 210 configs with factors == 40
  const std::size_t n = 14 * 15;
  CHECK(pair_universe_size(grid, c) == n * (n - 1) / 2);

  const PairSample s = sample_pairs(grid, 30, 5, c);
  CHECK(s.pairs.size() == 30);
  for (const auto& [x, y] : s.pairs) {
    CHECK(grid[x].factors == 40);
    CHECK(grid[y].factors == 40);
    CHECK(x < y);
  }
  REQUIRE(s.constraint.has_value());
  CHECK(s.constraint->dim == GridDim::factors);
}

TEST_CASE("pair sampling: property over random seeds") {
  const auto grid = build_grid(paper_default_grid(Algo::item_knn));
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const PairSample s = sample_pairs(grid, 10, seed);
    REQUIRE(s.pairs.size() == 10);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [x, y] : s.pairs) {
      CHECK(x < y);
      CHECK(y < grid.size());
      seen.insert({x, y});
    }
    CHECK(seen.size() == 10);
    // canonical enumeration order: pairs sorted by linear index
    CHECK(std::is_sorted(s.pairs.begin(), s.pairs.end()));
  }
}

TEST_CASE("dim_name round-trips and dim_value reads the right field") {
  for (GridDim d : {GridDim::neighbors, GridDim::factors, GridDim::iterations,
                    GridDim::learning_rate})
    CHECK(dim_from_name(dim_name(d)) == d);
  HyperConfig c;
  c.algo = Algo::bpr_mf;
  c.factors = 20;
  c.iterations = 8;
  c.learning_rate = 0.025;
  CHECK(dim_value(c, GridDim::factors) == 20.0);
  CHECK(dim_value(c, GridDim::iterations) == 8.0);
  CHECK(dim_value(c, GridDim::learning_rate) == 0.025);
}
