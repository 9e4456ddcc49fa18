#include "recdp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "recdp/errors.hpp"
#include "recdp/rng.hpp"

namespace recdp {

std::vector<double> resolve_dimension(const DimensionSpec& spec) {
  std::vector<double> out;
  if (!spec.values.empty()) {
    out = spec.values;
  } else {
    if (spec.exp_step == 0.0) throw ConfigError("exponent step must be nonzero");
    const double dir = spec.exp_step > 0.0 ? 1.0 : -1.0;
    for (double e = spec.exp_start;
         dir * e <= dir * spec.exp_end + 1e-9;
         e += spec.exp_step) {
      double v = std::pow(spec.base, e);
      if (spec.round_to_int) v = static_cast<double>(std::llround(v));
      out.push_back(v);
    }
    if (spec.dedupe)
      out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  if (out.empty()) throw ConfigError("empty grid dimension");
  return out;
}

GridSpec paper_default_grid(Algo algo) {
  GridSpec g;
  g.algo = algo;
  const std::vector<double> sizes = {10,  14,  20,  28,  40,  57,   80, 113,
                                     160, 226, 320, 452, 640, 905, 1809};
  g.neighbors = DimensionSpec::explicit_values(sizes);
  g.factors = DimensionSpec::explicit_values(sizes);
  g.iterations = DimensionSpec::explicit_values(
      {1, 2, 3, 4, 6, 8, 11, 16, 23, 32, 45, 64, 91, 128});
  std::vector<double> lr(15);
  lr[0] = 0.200003894816316;  // 2^-2.3219; halving is exact in binary
  for (int i = 1; i < 15; ++i) lr[i] = lr[i - 1] / 2.0;
  g.learning_rate = DimensionSpec::explicit_values(lr);
  return g;
}

std::vector<HyperConfig> build_grid(const GridSpec& spec) {
  std::vector<HyperConfig> out;
  if (spec.algo == Algo::bpr_mf) {
    const auto fs = resolve_dimension(spec.factors);
    const auto ts = resolve_dimension(spec.iterations);
    const auto ls = resolve_dimension(spec.learning_rate);
    out.reserve(fs.size() * ts.size() * ls.size());
    for (double f : fs)
      for (double t : ts)
        for (double l : ls) {
          HyperConfig c;
          c.algo = Algo::bpr_mf;
          c.factors = static_cast<int>(f);
          c.iterations = static_cast<int>(t);
          c.learning_rate = l;
          out.push_back(c);
        }
  } else {
    for (double k : resolve_dimension(spec.neighbors)) {
      HyperConfig c;
      c.algo = spec.algo;
      c.neighbors = static_cast<int>(k);
      out.push_back(c);
    }
  }
  return out;
}

std::string dim_name(GridDim d) {
  switch (d) {
    case GridDim::neighbors: return "neighbors";
    case GridDim::factors: return "factors";
    case GridDim::iterations: return "iterations";
    case GridDim::learning_rate: return "learning_rate";
  }
  return "?";
}

GridDim dim_from_name(const std::string& s) {
  if (s == "neighbors") return GridDim::neighbors;
  if (s == "factors") return GridDim::factors;
  if (s == "iterations") return GridDim::iterations;
  if (s == "learning_rate") return GridDim::learning_rate;
  throw ConfigError("unknown grid dimension: " + s);
}

double dim_value(const HyperConfig& c, GridDim d) {
  switch (d) {
    case GridDim::neighbors: return c.neighbors;
    case GridDim::factors: return c.factors;
    case GridDim::iterations: return c.iterations;
    case GridDim::learning_rate: return c.learning_rate;
  }
  return 0.0;
}

namespace {

std::vector<double> window(const std::vector<double>& values, double best,
                           int radius) {
  auto it = std::find_if(values.begin(), values.end(),
                         [&](double v) { return v == best; });
  if (it == values.end())
    throw ConfigError("best value not on the grid dimension");
  const auto idx = static_cast<std::ptrdiff_t>(it - values.begin());
  const auto lo = std::max<std::ptrdiff_t>(0, idx - radius);
  const auto hi = std::min<std::ptrdiff_t>(
      static_cast<std::ptrdiff_t>(values.size()) - 1, idx + radius);
  return {values.begin() + lo, values.begin() + hi + 1};
}

}  // namespace

std::vector<HyperConfig> subgrid_around_best(const GridSpec& spec,
                                             const HyperConfig& best,
                                             const std::vector<int>& radius) {
  GridSpec sub = spec;
  if (spec.algo == Algo::bpr_mf) {
    if (radius.size() != 3)
      throw ConfigError("bpr_mf sub-grid needs three radii");
    sub.factors = DimensionSpec::explicit_values(
        window(resolve_dimension(spec.factors), best.factors, radius[0]));
    sub.iterations = DimensionSpec::explicit_values(
        window(resolve_dimension(spec.iterations), best.iterations, radius[1]));
    sub.learning_rate = DimensionSpec::explicit_values(window(
        resolve_dimension(spec.learning_rate), best.learning_rate, radius[2]));
  } else {
    if (radius.size() != 1)
      throw ConfigError("knn sub-grid needs one radius");
    sub.neighbors = DimensionSpec::explicit_values(
        window(resolve_dimension(spec.neighbors), best.neighbors, radius[0]));
  }
  return build_grid(sub);
}

namespace {

std::vector<std::size_t> constrained_indices(
    const std::vector<HyperConfig>& grid,
    const std::optional<PairConstraint>& c) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!c || dim_value(grid[i], c->dim) == c->value) idx.push_back(i);
  return idx;
}

}  // namespace

std::size_t pair_universe_size(const std::vector<HyperConfig>& grid,
                               const std::optional<PairConstraint>& c) {
  const std::size_t s = constrained_indices(grid, c).size();
  return s * (s - 1) / 2;
}

PairSample sample_pairs(const std::vector<HyperConfig>& grid, std::size_t m,
                        std::uint64_t seed,
                        const std::optional<PairConstraint>& c) {
  const std::vector<std::size_t> idx = constrained_indices(grid, c);
  const std::size_t s = idx.size();
  const std::size_t universe = s * (s - 1) / 2;
  if (universe < m)
    throw ConfigError("pair universe too small: " + std::to_string(universe) +
                      " < " + std::to_string(m));

  // Floyd's sampling without replacement over the canonical linear order
  std::set<std::size_t> chosen;
  Rng rng(seed);
  for (std::size_t j = universe - m; j < universe; ++j) {
    const std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }

  PairSample out;
  out.seed = seed;
  out.constraint = c;
  out.pairs.reserve(m);
  for (std::size_t linear : chosen) {
    // linear index -> (a, b) with a < b over the constrained subset
    std::size_t a = 0, offset = linear;
    while (offset >= s - 1 - a) {
      offset -= s - 1 - a;
      ++a;
    }
    const std::size_t b = a + 1 + offset;
    out.pairs.emplace_back(idx[a], idx[b]);
  }
  return out;
}

}  // namespace recdp
