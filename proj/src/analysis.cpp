#include "recdp/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <thread>

#include "recdp/errors.hpp"
#include "recdp/metrics.hpp"
#include "recdp/rng.hpp"

namespace recdp {

namespace {

struct FoldContext {
  Dataset cv_train;
  RatingMatrix ratings;
  RelevanceJudgments rel;
  PopularityModel pop;
};

std::vector<RankedList> recommend_all(const HyperConfig& cfg,
                                      const FoldContext& fc,
                                      std::uint64_t seed, int N) {
  std::vector<RankedList> lists(fc.ratings.n_users);
  if (cfg.algo == Algo::bpr_mf) {
    const MfModel model = train_bpr_mf(fc.ratings, cfg, seed);
    for (std::uint32_t u = 0; u < fc.ratings.n_users; ++u) {
      if (u < fc.rel.relevant.size() && !fc.rel.relevant[u].empty())
        lists[u] = recommend_top_n(model, fc.ratings, u, N);
    }
  } else {
    const KnnModel model = cfg.algo == Algo::user_knn
                               ? train_user_knn(fc.ratings, cfg.neighbors)
                               : train_item_knn(fc.ratings, cfg.neighbors);
    for (std::uint32_t u = 0; u < fc.ratings.n_users; ++u) {
      if (u < fc.rel.relevant.size() && !fc.rel.relevant[u].empty())
        lists[u] = recommend_top_n(model, u, N);
    }
  }
  return lists;
}

}  // namespace

SweepResult run_grid(const std::vector<HyperConfig>& grid,
                     const Dataset& train, const FoldAssignment& fa,
                     MetricStore& store, const SweepOptions& opt) {
  // fold-level inputs are shared by every config
  std::vector<FoldContext> folds(fa.k);
  for (int f = 0; f < fa.k; ++f) {
    auto [cv_train, cv_valid] = fold_view(train, fa, f);
    folds[f].ratings = RatingMatrix::from(cv_train);
    folds[f].rel = judge(cv_valid, opt.tau, opt.strict_tau);
    folds[f].pop = build_popularity(cv_train);
    folds[f].cv_train = std::move(cv_train);
  }

  struct Cell {
    std::size_t config_idx;
    int fold;
  };
  std::vector<Cell> cells;
  for (std::size_t c = 0; c < grid.size(); ++c)
    for (int f = 0; f < fa.k; ++f) cells.push_back({c, f});

  SweepResult result;
  result.total = cells.size();
  std::atomic<std::size_t> next{0}, computed{0}, skipped{0}, failed{0};
  std::atomic<std::size_t> done{0};

  const auto worker = [&] {
    for (;;) {
      const std::size_t n = next.fetch_add(1);
      if (n >= cells.size()) return;
      const Cell cell = cells[n];
      const HyperConfig& cfg = grid[cell.config_idx];
      const std::string id = cfg.id();
      if (store.has_cell(id, cell.fold)) {
        ++skipped;
      } else {
        const std::uint64_t seed =
            derive_seed(opt.master_seed, cell.config_idx,
                        static_cast<std::uint64_t>(cell.fold));
        try {
          const FoldContext& fc = folds[cell.fold];
          EvalOptions eopt{opt.N, opt.rank_discount};
          const auto lists = recommend_all(cfg, fc, seed, opt.N);
          const auto matrices =
              evaluate_system(lists, fc.rel, fc.pop, eopt, id, cell.fold);
          store.put_cell(id, cell.fold, matrices, opt.header_lines);
          ++computed;
        } catch (const TrainingDivergedError& e) {
          store.mark_failed(id, cell.fold, e.what());
          ++failed;
        }
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (opt.verbose) {
        std::fprintf(stderr, "\rcells %zu/%zu (failures: %zu)", d,
                     cells.size(), failed.load());
        if (d == cells.size()) std::fprintf(stderr, "\n");
      }
    }
  };

  int nthreads = opt.threads > 0
                     ? opt.threads
                     : static_cast<int>(std::thread::hardware_concurrency());
  if (nthreads < 1) nthreads = 1;
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  result.computed = computed;
  result.skipped = skipped;
  result.failed = failed;
  return result;
}

DPReport dp_analysis(const MetricStore& store,
                     const std::vector<HyperConfig>& grid,
                     const PairSample& sample, int k_folds,
                     const DpOptions& opt) {
  DPReport report;
  report.seed = sample.seed;

  // Pair admission: drop pairs touching failed cells or with fewer than two
  // common users in any fold; the drop applies to every metric.
  struct AlignedPair {
    std::pair<std::size_t, std::size_t> pair;
    // per fold: positions into the two user/value arrays
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
        align;
  };
  std::vector<AlignedPair> admitted;
  const std::string& probe = opt.metrics.front();
  for (const auto& [a, b] : sample.pairs) {
    const std::string ida = grid[a].id(), idb = grid[b].id();
    bool failed = false;
    for (int f = 0; f < k_folds; ++f)
      if (store.cell_failed(ida, f) || store.cell_failed(idb, f))
        failed = true;
    if (failed) {
      ++report.pairs_dropped_failed;
      continue;
    }
    AlignedPair ap;
    ap.pair = {a, b};
    bool ok = true;
    for (int f = 0; f < k_folds; ++f) {
      const MetricMatrix& ma = store.get(ida, f, probe);
      const MetricMatrix& mb = store.get(idb, f, probe);
      std::vector<std::size_t> ia, ib;
      std::size_t i = 0, j = 0;
      while (i < ma.users.size() && j < mb.users.size()) {
        if (ma.users[i] < mb.users[j]) ++i;
        else if (mb.users[j] < ma.users[i]) ++j;
        else {
          ia.push_back(i++);
          ib.push_back(j++);
        }
      }
      if (ia.size() < 2) {
        ok = false;
        break;
      }
      ap.align.emplace_back(std::move(ia), std::move(ib));
    }
    if (!ok) {
      ++report.pairs_dropped_users;
      continue;
    }
    admitted.push_back(std::move(ap));
    report.pairs_used.push_back({a, b});
  }
  if (admitted.empty())
    throw InsufficientDataError("no usable pairs for DP analysis");

  for (const std::string& metric : opt.metrics) {
    std::vector<std::vector<double>> per_fold(k_folds);
    for (int f = 0; f < k_folds; ++f) {
      per_fold[f].reserve(admitted.size());
      for (const AlignedPair& ap : admitted) {
        const MetricMatrix& ma =
            store.get(grid[ap.pair.first].id(), f, metric);
        const MetricMatrix& mb =
            store.get(grid[ap.pair.second].id(), f, metric);
        const auto& [ia, ib] = ap.align[f];
        std::vector<double> x(ia.size()), y(ib.size());
        for (std::size_t t = 0; t < ia.size(); ++t) {
          x[t] = ma.values[ia[t]];
          y[t] = mb.values[ib[t]];
        }
        per_fold[f].push_back(paired_t_test(x, y, opt.one_tailed));
      }
    }
    MetricDp md;
    md.curve = build_curve(std::move(per_fold));
    md.curve.metric = metric;
    const DpValue v = discriminative_power(md.curve);
    md.dp = v.dp;
    md.dp_plus_sigma = v.dp_plus_sigma;
    report.per_metric.emplace(metric, std::move(md));
  }
  return report;
}

std::vector<DominantRow> dominant_analysis(const MetricStore& store,
                                           const std::vector<HyperConfig>& grid,
                                           GridDim dimension,
                                           const std::string& metric,
                                           std::size_t m, std::uint64_t seed,
                                           int k_folds, const DpOptions& opt) {
  std::vector<double> values;
  for (const HyperConfig& c : grid) values.push_back(dim_value(c, dimension));
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  DpOptions single = opt;
  single.metrics = {metric};

  std::vector<DominantRow> rows;
  for (double v : values) {
    PairConstraint pc{dimension, v};
    const std::size_t universe = pair_universe_size(grid, pc);
    if (universe == 0) continue;  // single config with this value
    DominantRow row;
    row.value = v;
    row.shortfall = universe < m;
    // same seed for every value, so identical constrained stores match
    const PairSample ps =
        sample_pairs(grid, std::min(m, universe), seed, pc);
    const DPReport rep = dp_analysis(store, grid, ps, k_folds, single);
    row.pairs_used = rep.pairs_used.size();
    row.dp = rep.per_metric.at(metric).dp;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace recdp
