#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recdp/recommenders.hpp"

namespace recdp {

// One grid dimension: either an explicit value list or a base-2 exponential
// generator. With `round_to_int` each 2^e is rounded to the nearest integer;
// `dedupe` drops consecutive duplicates after rounding.
struct DimensionSpec {
  std::vector<double> values;  // explicit when non-empty
  double exp_start = 0.0;
  double exp_end = 0.0;
  double exp_step = 0.0;
  double base = 2.0;
  bool round_to_int = false;
  bool dedupe = true;

  static DimensionSpec explicit_values(std::vector<double> v) {
    DimensionSpec d;
    d.values = std::move(v);
    return d;
  }
  static DimensionSpec exponential(double start, double end, double step,
                                   bool round, bool dedupe = true) {
    DimensionSpec d;
    d.exp_start = start;
    d.exp_end = end;
    d.exp_step = step;
    d.round_to_int = round;
    d.dedupe = dedupe;
    return d;
  }
};

std::vector<double> resolve_dimension(const DimensionSpec& spec);

struct GridSpec {
  Algo algo = Algo::user_knn;
  DimensionSpec neighbors;       // kNN
  DimensionSpec factors;         // BPR-MF
  DimensionSpec iterations;
  DimensionSpec learning_rate;
};

// The verbatim published grid: factors {10..1809} (15 values), iterations
// {1..128} (14), learning rates halving from 0.200003894816316 (15),
// neighbors = the factors list.
GridSpec paper_default_grid(Algo algo);

// Cartesian product, factors-major for BPR-MF.
std::vector<HyperConfig> build_grid(const GridSpec& spec);

enum class GridDim { neighbors, factors, iterations, learning_rate };
std::string dim_name(GridDim d);
GridDim dim_from_name(const std::string& s);
double dim_value(const HyperConfig& c, GridDim d);

// Per-dimension window of `radius[d]` grid steps around the best config
// (clipped at the dimension bounds), then the Cartesian product.
std::vector<HyperConfig> subgrid_around_best(const GridSpec& spec,
                                             const HyperConfig& best,
                                             const std::vector<int>& radius);

struct PairConstraint {
  GridDim dim = GridDim::neighbors;
  double value = 0.0;
};

// `pairs` hold grid indices, canonical (a < b) within each pair.
struct PairSample {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::uint64_t seed = 0;
  std::optional<PairConstraint> constraint;
};

// Number of unordered config pairs available under the constraint.
std::size_t pair_universe_size(const std::vector<HyperConfig>& grid,
                               const std::optional<PairConstraint>& c);

// Draws m distinct unordered pairs without replacement from the canonical
// enumeration of the (possibly constrained) pair universe.
PairSample sample_pairs(const std::vector<HyperConfig>& grid, std::size_t m,
                        std::uint64_t seed,
                        const std::optional<PairConstraint>& c = std::nullopt);

}  // namespace recdp
