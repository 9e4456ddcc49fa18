// Acceptance gate: one [PASS]/[FAIL] line per criterion, exit 1 on any
// failure. Heavier end-to-end pieces run the installed CLI binary.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "recdp/analysis.hpp"
#include "recdp/dataset.hpp"
#include "recdp/grid.hpp"
#include "recdp/metrics.hpp"
#include "recdp/rng.hpp"
#include "recdp/stats.hpp"

namespace fs = std::filesystem;
using namespace recdp;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
  std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : " — ", detail.c_str());
  if (!ok) ++g_failures;
}

struct CmdResult {
  int exit_code = -1;
  std::string out;
};

CmdResult run_cmd(const std::string& cmd) {
  CmdResult r;
  FILE* p = popen((cmd + " 2>&1").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof(buf), p)) r.out.append(buf, n);
  const int st = pclose(p);
  r.exit_code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

// ---------------------------------------------------------------- corpora --

// Two preference communities with a clear quality signal: in-community items
// get high ratings, the rest low. Timestamps are strictly increasing per
// user, so the temporal holdout is well defined.
Dataset community_corpus(int n_users, int n_items, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  for (int u = 0; u < n_users; ++u)
    d.user_labels.push_back("u" + std::to_string(u));
  for (int i = 0; i < n_items; ++i)
    d.item_labels.push_back("i" + std::to_string(i));
  for (int u = 0; u < n_users; ++u) {
    const int block = u % 2;
    std::int64_t ts = static_cast<std::int64_t>(u) * 100000;
    for (int i = 0; i < n_items; ++i) {
      const bool same = (i % 2) == block;
      if (rng.unit() >= (same ? 0.35 : 0.10)) continue;
      const double rating = same ? (rng.unit() < 0.8 ? 5.0 : 4.0)
                                 : (rng.unit() < 0.85 ? 2.0 : 4.0);
      d.interactions.push_back({static_cast<std::uint32_t>(u),
                                static_cast<std::uint32_t>(i), rating, ts++});
    }
  }
  return d;
}

void write_corpus_tsv(const Dataset& d, const fs::path& path) {
  std::ofstream out(path);
  for (const Interaction& x : d.interactions)
    out << d.user_labels[x.user] << '\t' << d.item_labels[x.item] << '\t'
        << x.rating << '\t' << x.timestamp << '\n';
}

// ------------------------------------------------------------- criteria ----

void check_table1_golden() {
  const CmdResult r = run_cmd(std::string(RECDP_BIN) + " grid --preset paper-default");
  std::string expected;
  char buf[64];
  const std::vector<int> sizes = {10,  14,  20,  28,  40,  57,  80, 113,
                                  160, 226, 320, 452, 640, 905, 1809};
  const std::vector<int> iters = {1, 2, 3, 4, 6, 8, 11, 16, 23, 32, 45, 64, 91, 128};
  for (int v : sizes) {
    std::snprintf(buf, sizeof(buf), "factors\t%d\n", v);
    expected += buf;
  }
  for (int v : iters) {
    std::snprintf(buf, sizeof(buf), "iterations\t%d\n", v);
    expected += buf;
  }
  double lr = 0.200003894816316;
  for (int i = 0; i < 15; ++i, lr /= 2.0) {
    std::snprintf(buf, sizeof(buf), "learning_rate\t%.10g\n", lr);
    expected += buf;
  }
  for (int v : sizes) {
    std::snprintf(buf, sizeof(buf), "neighbors\t%d\n", v);
    expected += buf;
  }
  report("published grid golden output",
         r.exit_code == 0 && r.out == expected);
}

void check_grid_cardinality() {
  const auto grid = build_grid(paper_default_grid(Algo::bpr_mf));
  report("bpr grid cardinality 3150", grid.size() == 3150,
         "got " + std::to_string(grid.size()));
}

void check_ttest_oracle() {
  using boost_t = boost::math::students_t_distribution<long double>;
  // part 1: 1000 random paired vectors, n in [5, 200], vs a long-double
  // oracle built on an independent distribution implementation
  Rng rng(424242);
  double worst_pair = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 5 + rng.below(196);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.gaussian(0.5, 0.2);
      y[i] = x[i] + rng.gaussian(0.02, 0.15);
    }
    const double got = paired_t_test(x, y);
    long double mean = 0.0L;
    for (std::size_t i = 0; i < n; ++i) mean += (long double)x[i] - y[i];
    mean /= n;
    long double ss = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const long double d = ((long double)x[i] - y[i]) - mean;
      ss += d * d;
    }
    const long double sd = sqrtl(ss / (n - 1));
    const long double t = mean / (sd / sqrtl((long double)n));
    const long double p =
        2.0L * boost::math::cdf(boost_t((long double)(n - 1)), -fabsl(t));
    worst_pair = std::max(worst_pair, std::fabs(got - (double)p));
  }
  report("paired t-test vs reference oracle (1e-9)", worst_pair <= 1e-9,
         "max abs diff " + std::to_string(worst_pair));

  // part 2: the (t, df) lattice at 1e-12
  double worst_lattice = 0.0;
  for (std::int64_t df : {1LL, 2LL, 3LL, 5LL, 9LL, 17LL, 42LL, 99LL, 250LL,
                          777LL, 1000LL, 4321LL, 10000LL}) {
    for (double t = 0.0; t <= 50.0; t += 0.5) {
      const double got = student_two_tail(t, df);
      const long double p =
          2.0L * boost::math::cdf(boost_t((long double)df), -fabsl(t));
      worst_lattice = std::max(worst_lattice, std::fabs(got - (double)p));
    }
  }
  report("student_two_tail lattice (1e-12)", worst_lattice <= 1e-12,
         "max abs diff " + std::to_string(worst_lattice));
}

void check_metric_permutation_oracle() {
  // 5-item pool, items {0..4}, relevant {1, 3}; every permutation checked
  // against from-scratch formulas at N = 5
  const std::vector<std::uint32_t> rel = {1, 3};
  PopularityModel pop;
  pop.n_users = 10;
  pop.count = {6, 1, 0, 3, 10};
  pop.seen = {5, 1, 0, 3, 8};
  pop.total = 20;
  const int N = 5;

  double worst = 0.0;
  std::array<std::uint32_t, 5> perm = {0, 1, 2, 3, 4};
  int n_perms = 0;
  std::sort(perm.begin(), perm.end());
  do {
    ++n_perms;
    RankedList l;
    l.items.assign(perm.begin(), perm.end());
    l.scores = {5, 4, 3, 2, 1};

    double hits = 0, dcg = 0, rr = 0, efd = 0, epc = 0;
    for (int k = 0; k < 5; ++k) {
      const std::uint32_t it = perm[k];
      const bool hit = it == 1 || it == 3;
      if (hit) {
        hits += 1;
        dcg += 1.0 / std::log2(k + 2.0);
        if (rr == 0) rr = 1.0 / (k + 1);
      }
      const double p = pop.count[it] > 0
                           ? pop.count[it] / (double)pop.total
                           : 1.0 / (double)(pop.total + 1);
      efd += -std::log2(p) / 5.0;
      epc += (1.0 - pop.seen[it] / (double)pop.n_users) / 5.0;
    }
    const double idcg = 1.0 + 1.0 / std::log2(3.0);  // two relevant items
    const double expect[6] = {dcg / idcg, hits / N, hits / 2.0, rr, efd, epc};
    const double got[6] = {ndcg_at(l, rel, N),  precision_at(l, rel, N),
                           recall_at(l, rel, N), mrr_at(l, rel, N),
                           efd_at(l, pop, N),    epc_at(l, pop, N)};
    for (int m = 0; m < 6; ++m)
      worst = std::max(worst, std::fabs(got[m] - expect[m]));
  } while (std::next_permutation(perm.begin(), perm.end()));

  report("metric permutation oracle (1e-12)", n_perms == 120 && worst <= 1e-12,
         "120 permutations, max abs diff " + std::to_string(worst));
}

void check_bpr_gradient() {
  const int F = 8;
  const double eta = 0.05, lu = eta / 20.0, li = eta / 200.0;
  Rng rng(90210);
  const auto objective = [&](const std::vector<double>& pu,
                             const std::vector<double>& qi,
                             const std::vector<double>& qj) {
    double x = 0, np = 0, ni = 0, nj = 0;
    for (int f = 0; f < F; ++f) {
      x += pu[f] * (qi[f] - qj[f]);
      np += pu[f] * pu[f];
      ni += qi[f] * qi[f];
      nj += qj[f] * qj[f];
    }
    return std::log(1.0 / (1.0 + std::exp(-x))) - 0.5 * lu * np -
           0.5 * li * (ni + nj);
  };
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> pu(F), qi(F), qj(F);
    for (int f = 0; f < F; ++f) {
      pu[f] = rng.gaussian(0.0, 0.5);
      qi[f] = rng.gaussian(0.0, 0.5);
      qj[f] = rng.gaussian(0.0, 0.5);
    }
    double x = 0;
    for (int f = 0; f < F; ++f) x += pu[f] * (qi[f] - qj[f]);
    const double g = 1.0 / (1.0 + std::exp(x));
    const double h = 1e-5;
    auto fd = [&](std::vector<double>& vec, int idx) {
      const double keep = vec[idx];
      vec[idx] = keep + h;
      const double hi = objective(pu, qi, qj);
      vec[idx] = keep - h;
      const double lo = objective(pu, qi, qj);
      vec[idx] = keep;
      return (hi - lo) / (2.0 * h);
    };
    for (int f = 0; f < F; ++f) {
      const double analytic[3] = {g * (qi[f] - qj[f]) - lu * pu[f],
                                  g * pu[f] - li * qi[f],
                                  -g * pu[f] - li * qj[f]};
      std::vector<double>* vecs[3] = {&pu, &qi, &qj};
      for (int v = 0; v < 3; ++v) {
        const double numeric = fd(*vecs[v], f);
        worst = std::max(worst, std::fabs(numeric - analytic[v]) /
                                    std::max(1e-8, std::fabs(analytic[v])));
      }
    }
  }
  report("bpr analytic gradient vs finite differences (1e-4)", worst <= 1e-4,
         "max rel err " + std::to_string(worst));
}

void check_self_pair_null() {
  const Dataset train = community_corpus(200, 100, 20260826);
  const FoldAssignment fa = kfold_assign(train, 3, 13);
  std::vector<HyperConfig> grid(4);
  grid[0].algo = Algo::user_knn;
  grid[0].neighbors = 5;
  grid[1].algo = Algo::user_knn;
  grid[1].neighbors = 20;
  grid[2].algo = Algo::item_knn;
  grid[2].neighbors = 20;
  grid[3].algo = Algo::bpr_mf;
  grid[3].factors = 8;
  grid[3].iterations = 2;
  grid[3].learning_rate = 0.05;

  MetricStore store;
  SweepOptions opt;
  opt.N = 10;
  opt.master_seed = 4;
  opt.threads = 2;
  const SweepResult r = run_grid(grid, train, fa, store, opt);
  if (r.computed != 12 || r.failed != 0) {
    report("self-pair null DP equals m exactly", false,
           "sweep computed " + std::to_string(r.computed) + ", failed " +
               std::to_string(r.failed));
    return;
  }

  PairSample self;
  self.pairs = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  const DPReport rep = dp_analysis(store, grid, self, 3);
  bool ok = rep.pairs_used.size() == 4;
  for (const std::string& m : kMetricNames) {
    const MetricDp& md = rep.per_metric.at(m);
    ok = ok && md.dp == 4.0 && md.dp_plus_sigma == 4.0;
  }
  report("self-pair null DP equals m exactly (all six metrics)", ok);
}

void check_sensitivity() {
  const Dataset train = community_corpus(200, 100, 31415);
  const FoldAssignment fa = kfold_assign(train, 3, 21);
  std::vector<HyperConfig> grid(2);
  grid[0].algo = Algo::user_knn;
  grid[0].neighbors = 1;
  grid[1].algo = Algo::user_knn;
  grid[1].neighbors = 50;

  MetricStore store;
  SweepOptions opt;
  opt.N = 10;
  opt.master_seed = 4;
  opt.threads = 2;
  run_grid(grid, train, fa, store, opt);

  PairSample separated, null_pairs;
  separated.pairs = {{0, 1}};
  null_pairs.pairs = {{0, 0}};
  const DPReport sep = dp_analysis(store, grid, separated, 3);
  const DPReport nul = dp_analysis(store, grid, null_pairs, 3);
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "ndcg %.6g vs %.6g, prec %.6g vs %.6g",
                sep.per_metric.at("ndcg").dp, nul.per_metric.at("ndcg").dp,
                sep.per_metric.at("prec").dp, nul.per_metric.at("prec").dp);
  const bool ok =
      sep.per_metric.at("ndcg").dp < nul.per_metric.at("ndcg").dp &&
      sep.per_metric.at("prec").dp < nul.per_metric.at("prec").dp;
  report("separated configs beat the null DP (ndcg, prec)", ok, detail);
}

void write_e2e_inputs(const fs::path& dir, const Dataset& corpus) {
  fs::create_directories(dir);
  write_corpus_tsv(corpus, dir / "data.tsv");
  const char* bpr = R"({
  "dataset": {"path": "data.tsv"},
  "split_ratio": 0.8,
  "folds": 3,
  "tau": 4.0,
  "cutoff": 10,
  "algo": "bpr_mf",
  "grid": {"factors": [8, 16, 32], "iterations": [2, 4, 8],
           "learning_rate": [0.1, 0.05, 0.025]},
  "pairs": 10,
  "master_seed": 5,
  "out": "out",
  "threads": 2
}
)";
  const char* knn = R"({
  "dataset": {"path": "data.tsv"},
  "split_ratio": 0.8,
  "folds": 3,
  "tau": 4.0,
  "cutoff": 10,
  "algo": "%s",
  "grid": {"neighbors": [5, 10, 20, 40, 80]},
  "pairs": 10,
  "master_seed": 5,
  "out": "out",
  "threads": 2
}
)";
  std::ofstream(dir / "cfg_bpr.json") << bpr;
  char buf[512];
  std::snprintf(buf, sizeof(buf), knn, "user_knn");
  std::ofstream(dir / "cfg_user_knn.json") << buf;
  std::snprintf(buf, sizeof(buf), knn, "item_knn");
  std::ofstream(dir / "cfg_item_knn.json") << buf;
}

bool run_e2e_pipeline(const fs::path& dir, std::string& why) {
  const std::string cd = "cd " + dir.string() + " && " + RECDP_BIN + " ";
  const std::vector<std::string> steps = {
      "prepare --config cfg_bpr.json",
      "sweep --config cfg_bpr.json",
      "sweep --config cfg_user_knn.json",
      "sweep --config cfg_item_knn.json",
      "dp --config cfg_bpr.json",
      "dp --config cfg_user_knn.json",
      "dp --config cfg_item_knn.json",
      "dominant --config cfg_bpr.json --dimension factors",
      "dominant --config cfg_bpr.json --dimension iterations",
      "dominant --config cfg_bpr.json --dimension learning_rate",
  };
  for (const std::string& s : steps) {
    const CmdResult r = run_cmd(cd + s);
    if (r.exit_code != 0) {
      why = s + " exited " + std::to_string(r.exit_code) + ": " + r.out;
      return false;
    }
  }
  return true;
}

bool trees_identical(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> rel_paths;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel_paths.push_back(fs::relative(e.path(), a));
  std::sort(rel_paths.begin(), rel_paths.end());
  std::size_t checked = 0;
  for (const fs::path& rel : rel_paths) {
    std::ifstream fa(a / rel, std::ios::binary), fb(b / rel, std::ios::binary);
    if (!fb) {
      why = rel.string() + " missing in second run";
      return false;
    }
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (sa.str() != sb.str()) {
      why = rel.string() + " differs between runs";
      return false;
    }
    ++checked;
  }
  why = std::to_string(checked) + " files compared";
  return true;
}

void check_end_to_end() {
  const fs::path root = fs::temp_directory_path() / "recdp_acceptance_e2e";
  fs::remove_all(root);
  const Dataset corpus = community_corpus(300, 200, 100);
  write_e2e_inputs(root / "run1", corpus);
  write_e2e_inputs(root / "run2", corpus);

  std::string why;
  for (const char* run : {"run1", "run2"}) {
    if (!run_e2e_pipeline(root / run, why)) {
      report("end-to-end desk-scale run", false, why);
      return;
    }
  }
  // every expected report must exist
  for (const char* f :
       {"dp_bpr_mf.json", "dp_user_knn.json", "dp_item_knn.json",
        "dominant_factors.tsv", "dominant_iterations.tsv",
        "dominant_learning_rate.tsv"}) {
    if (!fs::exists(root / "run1" / "out" / "reports" / f)) {
      report("end-to-end desk-scale run", false, std::string(f) + " missing");
      return;
    }
  }
  const bool same =
      trees_identical(root / "run1" / "out", root / "run2" / "out", why);
  report("end-to-end desk-scale run bit-identical across repeats", same, why);
  if (same) fs::remove_all(root);
}

void check_full_reproduction_config() {
  const fs::path cfg =
      fs::path(RECDP_SOURCE_DIR) / "configs" / "full-reproduction-ml1m.json";
  bool ok = false;
  std::string detail;
  try {
    std::ifstream in(cfg);
    if (!in) throw std::runtime_error("missing " + cfg.string());
    const auto j = nlohmann::json::parse(in);
    ok = j.at("grid").at("preset") == "paper-default" &&
         j.at("folds") == 10 && j.at("pairs") == 25;
    detail = "full sweep config present; execution optional";
  } catch (const std::exception& e) {
    detail = e.what();
  }
  // desk-scale runs cannot reproduce the published DP tables; the artifact
  // ships the optional full-sweep config instead
  report("full-reproduction config documented", ok, detail);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  check_table1_golden();
  check_grid_cardinality();
  check_ttest_oracle();
  check_metric_permutation_oracle();
  check_bpr_gradient();
  check_self_pair_null();
  check_end_to_end();
  check_full_reproduction_config();
  check_sensitivity();
  const auto dt = std::chrono::duration_cast<std::chrono::seconds>(
      std::chrono::steady_clock::now() - t0);
  std::printf("%s — %d failure(s), %llds\n",
              g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              g_failures, static_cast<long long>(dt.count()));
  return g_failures == 0 ? 0 : 1;
}
