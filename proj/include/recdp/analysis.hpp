#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "recdp/dataset.hpp"
#include "recdp/grid.hpp"
#include "recdp/stats.hpp"
#include "recdp/store.hpp"

namespace recdp {

struct SweepOptions {
  int N = 10;
  double tau = 4.0;
  bool strict_tau = false;
  bool rank_discount = false;
  std::uint64_t master_seed = 1;
  int threads = 0;  // 0 => hardware concurrency
  bool verbose = false;
  std::vector<std::string> header_lines;  // metadata block for cell files
};

struct SweepResult {
  std::size_t total = 0;
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

// Trains and evaluates every (config, fold) cell into the store. Cells
// already present (matching their manifest) are skipped; divergent cells are
// marked failed and the sweep continues. Per-cell training seed is
// derive_seed(master_seed, config index, fold), so results do not depend on
// scheduling.
SweepResult run_grid(const std::vector<HyperConfig>& grid,
                     const Dataset& train, const FoldAssignment& fa,
                     MetricStore& store, const SweepOptions& opt);

struct DpOptions {
  bool one_tailed = false;
  std::vector<std::string> metrics = kMetricNames;
};

struct MetricDp {
  PValueCurve curve;
  double dp = 0.0;
  double dp_plus_sigma = 0.0;
};

struct DPReport {
  std::map<std::string, MetricDp> per_metric;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_used;
  std::size_t pairs_dropped_failed = 0;
  std::size_t pairs_dropped_users = 0;
  std::uint64_t seed = 0;
};

// Paired t-tests over the sampled pairs, per fold and metric; pairs touching
// failed cells or sharing fewer than two users in any fold are dropped for
// all metrics (keeping m consistent across metrics).
DPReport dp_analysis(const MetricStore& store,
                     const std::vector<HyperConfig>& grid,
                     const PairSample& sample, int k_folds,
                     const DpOptions& opt = {});

struct DominantRow {
  double value = 0.0;
  double dp = 0.0;
  std::size_t pairs_used = 0;
  bool shortfall = false;  // constrained universe had fewer than m pairs
};

// Per-value DP of one dimension: pairs are constrained to share that value
// and differ elsewhere. The same seed is used for every value so identical
// constrained stores yield identical DP.
std::vector<DominantRow> dominant_analysis(const MetricStore& store,
                                           const std::vector<HyperConfig>& grid,
                                           GridDim dimension,
                                           const std::string& metric,
                                           std::size_t m, std::uint64_t seed,
                                           int k_folds,
                                           const DpOptions& opt = {});

}  // namespace recdp
