#include "recdp/recommenders.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "recdp/errors.hpp"
#include "recdp/rng.hpp"

namespace recdp {

std::string algo_name(Algo a) {
  switch (a) {
    case Algo::user_knn: return "user_knn";
    case Algo::item_knn: return "item_knn";
    case Algo::bpr_mf: return "bpr_mf";
  }
  return "?";
}

Algo algo_from_name(const std::string& s) {
  if (s == "user_knn") return Algo::user_knn;
  if (s == "item_knn") return Algo::item_knn;
  if (s == "bpr_mf") return Algo::bpr_mf;
  throw ConfigError("unknown algorithm: " + s);
}

void HyperConfig::validate() const {
  if (algo == Algo::bpr_mf) {
    if (factors < 1 || iterations < 1 || !(learning_rate > 0.0))
      throw ConfigError("bpr_mf needs factors >= 1, iterations >= 1, eta > 0");
  } else if (neighbors < 1) {
    throw ConfigError("knn needs neighbors >= 1");
  }
}

std::string HyperConfig::to_string() const {
  char buf[96];
  if (algo == Algo::bpr_mf) {
    std::snprintf(buf, sizeof(buf), "bpr_mf F=%d T=%d eta=%.17g", factors,
                  iterations, learning_rate);
  } else {
    std::snprintf(buf, sizeof(buf), "%s k=%d", algo_name(algo).c_str(),
                  neighbors);
  }
  return buf;
}

std::string HyperConfig::id() const {
  const std::string s = to_string();
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

RatingMatrix RatingMatrix::from(const Dataset& d) {
  RatingMatrix m;
  m.n_users = d.n_users();
  m.n_items = d.n_items();
  m.by_user.resize(m.n_users);
  m.by_item.resize(m.n_items);
  for (const Interaction& x : d.interactions) {
    m.by_user[x.user].emplace_back(x.item, x.rating);
    m.by_item[x.item].emplace_back(x.user, x.rating);
  }
  for (auto& row : m.by_user) std::sort(row.begin(), row.end());
  for (auto& col : m.by_item) std::sort(col.begin(), col.end());
  return m;
}

bool RatingMatrix::has(std::uint32_t user, std::uint32_t item) const {
  const auto& row = by_user[user];
  auto it = std::lower_bound(row.begin(), row.end(),
                             std::make_pair(item, -1e300));
  return it != row.end() && it->first == item;
}

double RatingMatrix::rating(std::uint32_t user, std::uint32_t item) const {
  const auto& row = by_user[user];
  auto it = std::lower_bound(row.begin(), row.end(),
                             std::make_pair(item, -1e300));
  return (it != row.end() && it->first == item) ? it->second : 0.0;
}

namespace {

// Cosine top-k over the rows of `profiles`, with `adjacency` giving for each
// column the rows touching it. Shared by both kNN orientations.
std::vector<std::vector<std::pair<std::uint32_t, double>>> cosine_top_k(
    const std::vector<std::vector<std::pair<std::uint32_t, double>>>& profiles,
    const std::vector<std::vector<std::pair<std::uint32_t, double>>>& adjacency,
    int k) {
  const std::size_t n = profiles.size();
  std::vector<double> norm(n, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    double s = 0.0;
    for (const auto& [c, r] : profiles[e]) s += r * r;
    norm[e] = std::sqrt(s);
  }

  std::vector<std::vector<std::pair<std::uint32_t, double>>> out(n);
  std::vector<double> dot(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> touched;
  for (std::size_t e = 0; e < n; ++e) {
    if (norm[e] == 0.0) continue;
    touched.clear();
    for (const auto& [c, r] : profiles[e]) {
      for (const auto& [other, ro] : adjacency[c]) {
        if (other == e) continue;
        if (!seen[other]) {
          seen[other] = 1;
          touched.push_back(other);
        }
        dot[other] += r * ro;
      }
    }
    std::vector<std::pair<std::uint32_t, double>> cand;
    cand.reserve(touched.size());
    for (std::uint32_t other : touched) {
      if (dot[other] != 0.0 && norm[other] > 0.0)
        cand.emplace_back(other, dot[other] / (norm[e] * norm[other]));
      dot[other] = 0.0;
      seen[other] = 0;
    }
    const auto cmp = [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    };
    const std::size_t keep = std::min<std::size_t>(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(), cmp);
    cand.resize(keep);
    out[e] = std::move(cand);
  }
  return out;
}

}  // namespace

KnnModel train_user_knn(const RatingMatrix& m, int k) {
  if (k < 1) throw ConfigError("neighbors must be >= 1");
  KnnModel model;
  model.orientation = KnnOrientation::user;
  model.k = k;
  model.ratings = m;
  model.neighbors = cosine_top_k(m.by_user, m.by_item, k);
  return model;
}

KnnModel train_item_knn(const RatingMatrix& m, int k) {
  if (k < 1) throw ConfigError("neighbors must be >= 1");
  KnnModel model;
  model.orientation = KnnOrientation::item;
  model.k = k;
  model.ratings = m;
  model.neighbors = cosine_top_k(m.by_item, m.by_user, k);
  return model;
}

KnnModel train_user_knn(const Dataset& cv_train, int k) {
  return train_user_knn(RatingMatrix::from(cv_train), k);
}

KnnModel train_item_knn(const Dataset& cv_train, int k) {
  return train_item_knn(RatingMatrix::from(cv_train), k);
}

double knn_score(const KnnModel& m, std::uint32_t user, std::uint32_t item) {
  double s = 0.0;
  if (m.orientation == KnnOrientation::user) {
    if (user >= m.neighbors.size()) return 0.0;
    for (const auto& [v, sim] : m.neighbors[user]) {
      const double r = m.ratings.rating(v, item);
      if (r != 0.0) s += sim * r;
    }
  } else {
    if (item >= m.neighbors.size()) return 0.0;
    for (const auto& [j, sim] : m.neighbors[item]) {
      const double r = m.ratings.rating(user, j);
      if (r != 0.0) s += sim * r;
    }
  }
  return s;
}

MfModel train_bpr_mf(const RatingMatrix& m, const HyperConfig& cfg,
                     std::uint64_t seed) {
  if (cfg.algo != Algo::bpr_mf) throw ConfigError("config is not bpr_mf");
  cfg.validate();
  const int F = cfg.factors;
  const double eta = cfg.learning_rate;

  MfModel model;
  model.factors = F;
  model.iterations = cfg.iterations;
  model.learning_rate = eta;
  model.lambda_user = eta / 20.0;
  model.lambda_item = eta / 200.0;
  model.seed = seed;
  model.n_users = m.n_users;
  model.n_items = m.n_items;

  Rng rng(seed);
  model.user_factors.resize(m.n_users * F);
  model.item_factors.resize(m.n_items * F);
  for (double& v : model.user_factors) v = rng.gaussian(0.0, 0.1);
  for (double& v : model.item_factors) v = rng.gaussian(0.0, 0.1);

  // users with at least one training item and at least one unrated item
  std::vector<std::uint32_t> eligible;
  std::size_t steps = 0;
  for (std::size_t u = 0; u < m.n_users; ++u) {
    steps += m.by_user[u].size();
    if (!m.by_user[u].empty() && m.by_user[u].size() < m.n_items)
      eligible.push_back(static_cast<std::uint32_t>(u));
  }
  if (eligible.empty()) throw EmptyDatasetError("no trainable users");

  double* P = model.user_factors.data();
  double* Q = model.item_factors.data();
  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t s = 0; s < steps; ++s) {
      const std::uint32_t u = eligible[rng.below(eligible.size())];
      const auto& prof = m.by_user[u];
      const std::uint32_t i = prof[rng.below(prof.size())].first;
      std::uint32_t j;
      do {
        j = static_cast<std::uint32_t>(rng.below(m.n_items));
      } while (m.has(u, j));

      double* pu = P + static_cast<std::size_t>(u) * F;
      double* qi = Q + static_cast<std::size_t>(i) * F;
      double* qj = Q + static_cast<std::size_t>(j) * F;
      double x = 0.0;
      for (int f = 0; f < F; ++f) x += pu[f] * (qi[f] - qj[f]);
      const double g = 1.0 / (1.0 + std::exp(x));  // sigma(-x)
      for (int f = 0; f < F; ++f) {
        const double pf = pu[f], qif = qi[f], qjf = qj[f];
        pu[f] += eta * (g * (qif - qjf) - model.lambda_user * pf);
        qi[f] += eta * (g * pf - model.lambda_item * qif);
        qj[f] += eta * (-g * pf - model.lambda_item * qjf);
      }
    }
    for (double v : model.user_factors)
      if (!std::isfinite(v)) throw TrainingDivergedError(it);
    for (double v : model.item_factors)
      if (!std::isfinite(v)) throw TrainingDivergedError(it);
  }
  return model;
}

MfModel train_bpr_mf(const Dataset& cv_train, const HyperConfig& cfg,
                     std::uint64_t seed) {
  return train_bpr_mf(RatingMatrix::from(cv_train), cfg, seed);
}

double mf_score(const MfModel& m, std::uint32_t user, std::uint32_t item) {
  if (user >= m.n_users || item >= m.n_items) return 0.0;
  const double* p = m.user_factors.data() +
                    static_cast<std::size_t>(user) * m.factors;
  const double* q = m.item_factors.data() +
                    static_cast<std::size_t>(item) * m.factors;
  double s = 0.0;
  for (int f = 0; f < m.factors; ++f) s += p[f] * q[f];
  return s;
}

namespace {

RankedList top_n_from_scores(std::uint32_t user, const RatingMatrix& train,
                             const std::vector<double>& score, int N) {
  std::vector<std::uint32_t> cand;
  cand.reserve(train.n_items);
  const auto& prof = train.by_user[user];
  std::size_t pi = 0;
  for (std::uint32_t i = 0; i < train.n_items; ++i) {
    while (pi < prof.size() && prof[pi].first < i) ++pi;
    if (pi < prof.size() && prof[pi].first == i) continue;  // already rated
    cand.push_back(i);
  }
  const auto cmp = [&](std::uint32_t a, std::uint32_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a < b;
  };
  const std::size_t keep = std::min<std::size_t>(N, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(), cmp);
  cand.resize(keep);

  RankedList out;
  out.user = user;
  out.items = std::move(cand);
  out.scores.reserve(out.items.size());
  for (std::uint32_t i : out.items) out.scores.push_back(score[i]);
  return out;
}

}  // namespace

RankedList recommend_top_n(const KnnModel& m, std::uint32_t user, int N) {
  if (N < 1) throw ConfigError("N must be >= 1");
  const RatingMatrix& train = m.ratings;
  if (user >= train.n_users) return RankedList{user, {}, {}};
  std::vector<double> score(train.n_items, 0.0);
  if (m.orientation == KnnOrientation::user) {
    // accumulate over the neighbors' profiles
    for (const auto& [v, sim] : m.neighbors[user])
      for (const auto& [i, r] : train.by_user[v]) score[i] += sim * r;
  } else {
    for (std::uint32_t i = 0; i < train.n_items; ++i)
      score[i] = knn_score(m, user, i);
  }
  return top_n_from_scores(user, train, score, N);
}

RankedList recommend_top_n(const MfModel& m, const RatingMatrix& train,
                           std::uint32_t user, int N) {
  if (N < 1) throw ConfigError("N must be >= 1");
  if (user >= train.n_users || user >= m.n_users)
    return RankedList{user, {}, {}};
  std::vector<double> score(train.n_items, 0.0);
  for (std::uint32_t i = 0; i < train.n_items; ++i)
    score[i] = mf_score(m, user, i);
  return top_n_from_scores(user, train, score, N);
}

void save_knn_model(const KnnModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  char buf[48];
  out << "recdp-knn 1\n";
  out << (m.orientation == KnnOrientation::user ? "user" : "item") << ' '
      << m.k << ' ' << m.neighbors.size() << '\n';
  for (const auto& list : m.neighbors) {
    out << list.size();
    for (const auto& [id, sim] : list) {
      std::snprintf(buf, sizeof(buf), "%a", sim);
      out << ' ' << id << ' ' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

KnnModel load_knn_model(const std::string& path, const Dataset& cv_train) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string magic;
  int ver = 0;
  in >> magic >> ver;
  if (magic != "recdp-knn" || ver != 1)
    throw DataError(path + ": not a knn model file");
  std::string orient;
  int k = 0;
  std::size_t n = 0;
  in >> orient >> k >> n;
  KnnModel m;
  m.orientation =
      orient == "user" ? KnnOrientation::user : KnnOrientation::item;
  m.k = k;
  m.ratings = RatingMatrix::from(cv_train);
  m.neighbors.resize(n);
  for (auto& list : m.neighbors) {
    std::size_t len = 0;
    in >> len;
    list.resize(len);
    for (auto& [id, sim] : list) {
      std::string hex;
      in >> id >> hex;
      sim = std::strtod(hex.c_str(), nullptr);
    }
  }
  if (!in) throw DataError(path + ": truncated knn model file");
  return m;
}

void save_mf_model(const MfModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  char buf[48];
  out << "recdp-mf 1\n";
  std::snprintf(buf, sizeof(buf), "%a", m.learning_rate);
  out << m.n_users << ' ' << m.n_items << ' ' << m.factors << ' '
      << m.iterations << ' ' << buf << ' ' << m.seed << '\n';
  const auto dump = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%a", v[i]);
      out << buf << ((i + 1) % m.factors == 0 ? '\n' : ' ');
    }
  };
  dump(m.user_factors);
  dump(m.item_factors);
  if (!out) throw DataError("write failed for " + path);
}

MfModel load_mf_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string magic;
  int ver = 0;
  in >> magic >> ver;
  if (magic != "recdp-mf" || ver != 1)
    throw DataError(path + ": not an mf model file");
  MfModel m;
  std::string eta_hex;
  in >> m.n_users >> m.n_items >> m.factors >> m.iterations >> eta_hex >>
      m.seed;
  m.learning_rate = std::strtod(eta_hex.c_str(), nullptr);
  m.lambda_user = m.learning_rate / 20.0;
  m.lambda_item = m.learning_rate / 200.0;
  m.user_factors.resize(m.n_users * m.factors);
  m.item_factors.resize(m.n_items * m.factors);
  std::string hex;
  for (double& v : m.user_factors) {
    in >> hex;
    v = std::strtod(hex.c_str(), nullptr);
  }
  for (double& v : m.item_factors) {
    in >> hex;
    v = std::strtod(hex.c_str(), nullptr);
  }
  if (!in) throw DataError(path + ": truncated mf model file");
  return m;
}

}  // namespace recdp
