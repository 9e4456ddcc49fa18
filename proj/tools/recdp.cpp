// recdp — train kNN / BPR-MF recommenders over a hyper-parameter grid under
// k-fold cross-validation and measure the discriminative power of ranking
// metrics. Subcommands: prepare, sweep, dp, dominant, grid.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "recdp/analysis.hpp"
#include "recdp/dataset.hpp"
#include "recdp/errors.hpp"
#include "recdp/grid.hpp"
#include "recdp/metrics.hpp"
#include "recdp/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace recdp;

namespace {

struct RunConfig {
  std::string dataset_path;
  TextFormat format;
  std::size_t min_user = 0;
  std::size_t min_item = 0;
  double sample_fraction = 1.0;
  std::uint64_t sample_seed = 7;
  double split_ratio = 0.8;
  int folds = 10;
  double tau = 4.0;
  bool strict_tau = false;
  int cutoff = 10;
  bool rank_discount = false;
  bool one_tailed = false;
  Algo algo = Algo::user_knn;
  json grid_json;  // {"preset": "..."} or explicit dimension lists
  std::size_t pairs = 25;
  std::uint64_t master_seed = 1;
  std::string out = "out";
  int threads = 0;
  json raw;  // canonical form, hashed into every emitted file

  void validate() const {
    if (folds < 2) throw ConfigError("folds must be >= 2");
    if (pairs < 1) throw ConfigError("pairs must be >= 1");
    if (cutoff < 1) throw ConfigError("cutoff must be >= 1");
    if (!(split_ratio > 0.0 && split_ratio < 1.0))
      throw ConfigError("split ratio must be in (0, 1)");
  }
};

std::string fnv_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  RunConfig c;
  c.raw = j;
  if (j.contains("dataset")) {
    const json& d = j["dataset"];
    c.dataset_path = d.value("path", "");
    const std::string delim = d.value("delimiter", "\t");
    if (delim.size() != 1) throw ConfigError("delimiter must be one char");
    c.format.delimiter = delim[0];
    if (d.contains("columns")) {
      const auto cols = d["columns"].get<std::vector<int>>();
      if (cols.size() != 4) throw ConfigError("columns needs 4 entries");
      std::copy(cols.begin(), cols.end(), c.format.columns.begin());
    }
    c.format.has_header = d.value("header", false);
  }
  if (j.contains("filter")) {
    c.min_user = j["filter"].value("min_user", 0);
    c.min_item = j["filter"].value("min_item", 0);
  }
  if (j.contains("sample")) {
    c.sample_fraction = j["sample"].value("fraction", 1.0);
    c.sample_seed = j["sample"].value("seed", 7);
  }
  c.split_ratio = j.value("split_ratio", 0.8);
  c.folds = j.value("folds", 10);
  c.tau = j.value("tau", 4.0);
  c.strict_tau = j.value("strict_tau", false);
  c.cutoff = j.value("cutoff", 10);
  c.rank_discount = j.value("rank_discount", false);
  c.one_tailed = j.value("one_tailed", false);
  if (j.contains("algo")) c.algo = algo_from_name(j["algo"]);
  if (j.contains("grid")) c.grid_json = j["grid"];
  c.pairs = j.value("pairs", 25);
  c.master_seed = j.value("master_seed", 1);
  c.out = j.value("out", "out");
  c.threads = j.value("threads", 0);
  c.validate();
  return c;
}

DimensionSpec parse_dimension(const json& j) {
  if (j.is_array())
    return DimensionSpec::explicit_values(j.get<std::vector<double>>());
  DimensionSpec d;
  d.exp_start = j.at("exp_start").get<double>();
  d.exp_end = j.at("exp_end").get<double>();
  d.exp_step = j.at("exp_step").get<double>();
  d.base = j.value("base", 2.0);
  d.round_to_int = j.value("round", false);
  d.dedupe = j.value("dedupe", true);
  return d;
}

GridSpec resolve_grid_spec(const RunConfig& c) {
  if (c.grid_json.is_object() && c.grid_json.contains("preset")) {
    const std::string preset = c.grid_json["preset"];
    if (preset != "paper-default")
      throw ConfigError("unknown grid preset: " + preset);
    return paper_default_grid(c.algo);
  }
  if (c.grid_json.is_null())
    throw ConfigError("config has no grid (explicit lists or a preset)");
  GridSpec g;
  g.algo = c.algo;
  if (c.algo == Algo::bpr_mf) {
    g.factors = parse_dimension(c.grid_json.at("factors"));
    g.iterations = parse_dimension(c.grid_json.at("iterations"));
    g.learning_rate = parse_dimension(c.grid_json.at("learning_rate"));
  } else {
    g.neighbors = parse_dimension(c.grid_json.at("neighbors"));
  }
  return g;
}

std::vector<std::string> metadata_block(const RunConfig& c) {
  return {std::string("# recdp ") + kVersion,
          "# config_hash=" + fnv_hex(c.raw.dump()),
          "# master_seed=" + std::to_string(c.master_seed)};
}

void print_dimension(const std::string& name, const std::vector<double>& vs) {
  char buf[48];
  for (double v : vs) {
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    std::printf("%s\t%s\n", name.c_str(), buf);
  }
}

int cmd_grid(const std::optional<RunConfig>& cfg, const std::string& preset) {
  if (!preset.empty()) {
    if (preset != "paper-default")
      throw ConfigError("unknown grid preset: " + preset);
    const GridSpec g = paper_default_grid(Algo::bpr_mf);
    print_dimension("factors", resolve_dimension(g.factors));
    print_dimension("iterations", resolve_dimension(g.iterations));
    print_dimension("learning_rate", resolve_dimension(g.learning_rate));
    print_dimension("neighbors", resolve_dimension(g.neighbors));
    return 0;
  }
  if (!cfg) throw ConfigError("grid needs --preset or --config");
  const GridSpec g = resolve_grid_spec(*cfg);
  if (cfg->algo == Algo::bpr_mf) {
    print_dimension("factors", resolve_dimension(g.factors));
    print_dimension("iterations", resolve_dimension(g.iterations));
    print_dimension("learning_rate", resolve_dimension(g.learning_rate));
  } else {
    print_dimension("neighbors", resolve_dimension(g.neighbors));
  }
  return 0;
}

int cmd_prepare(const RunConfig& c) {
  if (c.dataset_path.empty()) throw ConfigError("config has no dataset.path");
  Dataset d = load_interactions(c.dataset_path, c.format);
  if (c.min_user > 0 || c.min_item > 0)
    d = filter_core(d, c.min_user, c.min_item);
  if (c.sample_fraction < 1.0)
    d = sample_stratified(d, c.sample_fraction, c.sample_seed);

  const SplitPair split = temporal_holdout(d, c.split_ratio);
  const FoldAssignment fa = kfold_assign(split.train, c.folds, c.master_seed);

  const fs::path dir = fs::path(c.out) / "splits";
  fs::create_directories(dir);
  const auto meta = metadata_block(c);
  save_interactions(split.train, (dir / "train.tsv").string(), meta);
  save_interactions(split.test, (dir / "test.tsv").string(), meta);

  std::ofstream ff(dir / "folds.tsv");
  for (const std::string& h : meta) ff << h << '\n';
  for (int f : fa.fold) ff << f << '\n';
  if (!ff) throw DataError("write failed for folds.tsv");

  const double sparsity =
      100.0 * (1.0 - static_cast<double>(d.n_interactions()) /
                         (static_cast<double>(d.n_users()) *
                          static_cast<double>(d.n_items())));
  json stats;
  stats["version"] = kVersion;
  stats["config_hash"] = fnv_hex(c.raw.dump());
  stats["master_seed"] = c.master_seed;
  stats["users"] = d.n_users();
  stats["items"] = d.n_items();
  stats["ratings"] = d.n_interactions();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", sparsity);
  stats["sparsity"] = buf;
  stats["train_rows"] = split.train.n_interactions();
  stats["test_rows"] = split.test.n_interactions();
  stats["fingerprint"] = d.fingerprint();
  std::ofstream sf(dir / "stats.json");
  sf << stats.dump(2) << '\n';

  std::printf("prepared: %zu users, %zu items, %zu ratings, sparsity %s\n",
              d.n_users(), d.n_items(), d.n_interactions(), buf);
  return 0;
}

struct Splits {
  Dataset train;
  FoldAssignment fa;
};

Splits load_splits(const RunConfig& c) {
  const fs::path dir = fs::path(c.out) / "splits";
  Splits s;
  s.train = load_interactions((dir / "train.tsv").string(), TextFormat{});
  std::ifstream ff(dir / "folds.tsv");
  if (!ff) throw DataError("missing folds.tsv; run prepare first");
  std::string line;
  s.fa.k = c.folds;
  while (std::getline(ff, line)) {
    if (line.empty() || line[0] == '#') continue;
    s.fa.fold.push_back(std::stoi(line));
  }
  if (s.fa.fold.size() != s.train.n_interactions())
    throw DataError("folds.tsv row count does not match train.tsv");
  return s;
}

int cmd_sweep(const RunConfig& c) {
  const Splits s = load_splits(c);
  const auto grid = build_grid(resolve_grid_spec(c));
  MetricStore store(fs::path(c.out) / "store");
  SweepOptions opt;
  opt.N = c.cutoff;
  opt.tau = c.tau;
  opt.strict_tau = c.strict_tau;
  opt.rank_discount = c.rank_discount;
  opt.master_seed = c.master_seed;
  opt.threads = c.threads;
  opt.verbose = true;
  opt.header_lines = metadata_block(c);
  const SweepResult r = run_grid(grid, s.train, s.fa, store, opt);
  std::printf("sweep: %zu cells (%zu computed, %zu skipped, %zu failed)\n",
              r.total, r.computed, r.skipped, r.failed);
  return r.failed > 0 ? 3 : 0;
}

json curve_json(const PValueCurve& c) {
  json j;
  j["per_fold"] = c.per_fold;
  j["mean"] = c.mean;
  j["sigma"] = c.sigma;
  return j;
}

int cmd_dp(const RunConfig& c) {
  const auto grid = build_grid(resolve_grid_spec(c));
  MetricStore store(fs::path(c.out) / "store");
  const PairSample ps = sample_pairs(grid, c.pairs, c.master_seed);
  DpOptions opt;
  opt.one_tailed = c.one_tailed;
  const DPReport rep = dp_analysis(store, grid, ps, c.folds, opt);

  const fs::path dir = fs::path(c.out) / "reports";
  fs::create_directories(dir);

  json j;
  j["version"] = kVersion;
  j["config_hash"] = fnv_hex(c.raw.dump());
  j["master_seed"] = c.master_seed;
  j["algo"] = algo_name(c.algo);
  j["pair_seed"] = rep.seed;
  j["pairs_dropped_failed"] = rep.pairs_dropped_failed;
  j["pairs_dropped_users"] = rep.pairs_dropped_users;
  json pairs = json::array();
  for (const auto& [a, b] : rep.pairs_used)
    pairs.push_back({{"a", grid[a].to_string()}, {"b", grid[b].to_string()}});
  j["pairs"] = pairs;
  json grid_j = json::array();
  for (const HyperConfig& g : grid) grid_j.push_back(g.to_string());
  j["grid"] = grid_j;
  for (const auto& [metric, md] : rep.per_metric) {
    j["metrics"][metric]["dp"] = md.dp;
    j["metrics"][metric]["dp_plus_sigma"] = md.dp_plus_sigma;
    j["metrics"][metric]["curve"] = curve_json(md.curve);
  }
  const fs::path report_path = dir / ("dp_" + algo_name(c.algo) + ".json");
  std::ofstream rf(report_path);
  rf << j.dump(2) << '\n';
  if (!rf) throw DataError("write failed for " + report_path.string());

  // plot data, one file per metric: rank, mean_p, sigma
  for (const auto& [metric, md] : rep.per_metric) {
    const fs::path pp =
        dir / ("dp_" + algo_name(c.algo) + "_" + metric + ".tsv");
    std::ofstream pf(pp);
    for (const std::string& h : metadata_block(c)) pf << h << '\n';
    char buf[96];
    for (std::size_t r = 0; r < md.curve.m; ++r) {
      std::snprintf(buf, sizeof(buf), "%zu\t%.10g\t%.10g", r + 1,
                    md.curve.mean[r], md.curve.sigma[r]);
      pf << buf << '\n';
    }
  }

  std::string best, worst;
  double best_dp = 1e300, worst_dp = -1e300;
  for (const auto& [metric, md] : rep.per_metric) {
    if (md.dp < best_dp) { best_dp = md.dp; best = metric; }
    if (md.dp > worst_dp) { worst_dp = md.dp; worst = metric; }
  }
  std::printf("discriminative power (%s, %zu pairs, %d folds):\n",
              algo_name(c.algo).c_str(), rep.pairs_used.size(), c.folds);
  for (const std::string& metric : kMetricNames) {
    auto it = rep.per_metric.find(metric);
    if (it == rep.per_metric.end()) continue;
    const char* mark =
        metric == best ? "  **best**" : (metric == worst ? "  (worst)" : "");
    std::printf("  %-5s DP=%-12.6g DP+sigma=%-12.6g%s\n", metric.c_str(),
                it->second.dp, it->second.dp_plus_sigma, mark);
  }
  return 0;
}

int cmd_dominant(const RunConfig& c, const std::string& dimension,
                 const std::string& metric) {
  const GridDim dim = dim_from_name(dimension);
  const auto grid = build_grid(resolve_grid_spec(c));
  MetricStore store(fs::path(c.out) / "store");
  DpOptions opt;
  opt.one_tailed = c.one_tailed;
  const auto rows = dominant_analysis(store, grid, dim, metric, c.pairs,
                                      c.master_seed, c.folds, opt);
  if (rows.empty()) throw InsufficientDataError("no analysable values");

  double best_dp = 1e300, best_value = 0.0;
  for (const DominantRow& r : rows)
    if (r.dp < best_dp) { best_dp = r.dp; best_value = r.value; }

  const fs::path dir = fs::path(c.out) / "reports";
  fs::create_directories(dir);
  const fs::path path = dir / ("dominant_" + dimension + ".tsv");
  std::ofstream out(path);
  for (const std::string& h : metadata_block(c)) out << h << '\n';
  out << "value\tdp\tpairs\tshortfall\tbest\n";
  char buf[128];
  for (const DominantRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.10g\t%.10g\t%zu\t%d\t%s", r.value,
                  r.dp, r.pairs_used, r.shortfall ? 1 : 0,
                  r.value == best_value ? "*" : "");
    out << buf << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());

  std::printf("dominant analysis of %s (%s):\n", dimension.c_str(),
              metric.c_str());
  for (const DominantRow& r : rows)
    std::printf("  %-12.6g DP=%-12.6g pairs=%zu%s%s\n", r.value, r.dp,
                r.pairs_used, r.shortfall ? " (shortfall)" : "",
                r.value == best_value ? "  **best**" : "");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recommender metric discriminative-power toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("recdp ") + kVersion);

  std::string config_path, preset, dimension, metric = "ndcg";

  auto* grid_cmd = app.add_subcommand("grid", "print a resolved grid");
  grid_cmd->add_option("--config", config_path, "run config (JSON)");
  grid_cmd->add_option("--preset", preset, "named preset (paper-default)");

  auto* prepare = app.add_subcommand("prepare", "build splits and folds");
  prepare->add_option("--config", config_path)->required();

  auto* sweep = app.add_subcommand("sweep", "train and evaluate the grid");
  sweep->add_option("--config", config_path)->required();

  auto* dp = app.add_subcommand("dp", "discriminative power report");
  dp->add_option("--config", config_path)->required();

  auto* dominant = app.add_subcommand("dominant", "per-value DP of one dimension");
  dominant->add_option("--config", config_path)->required();
  dominant->add_option("--dimension", dimension, "grid dimension")->required();
  dominant->add_option("--metric", metric, "metric (default ndcg)");

  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<RunConfig> cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (grid_cmd->parsed()) return cmd_grid(cfg, preset);
    if (prepare->parsed()) return cmd_prepare(*cfg);
    if (sweep->parsed()) return cmd_sweep(*cfg);
    if (dp->parsed()) return cmd_dp(*cfg);
    if (dominant->parsed()) return cmd_dominant(*cfg, dimension, metric);
  } catch (const TrainingDivergedError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
