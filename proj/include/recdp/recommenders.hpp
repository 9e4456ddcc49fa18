#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recdp/dataset.hpp"

namespace recdp {

enum class Algo { user_knn, item_knn, bpr_mf };

std::string algo_name(Algo a);
Algo algo_from_name(const std::string& s);

// One point on the hyper-parameter grid. Exactly the fields of the active
// variant are meaningful: `neighbors` for kNN, the triple for BPR-MF.
struct HyperConfig {
  Algo algo = Algo::user_knn;
  int neighbors = 0;
  int factors = 0;
  int iterations = 0;
  double learning_rate = 0.0;

  void validate() const;
  // Canonical human-readable form, e.g. "user_knn k=10".
  std::string to_string() const;
  // Content hash of the canonical form, used as the store directory name.
  std::string id() const;
  bool operator==(const HyperConfig&) const = default;
};

// Sparse view of a training dataset with per-user and per-item adjacency,
// both sorted by the opposite id for binary-search lookups.
struct RatingMatrix {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> by_user;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> by_item;

  static RatingMatrix from(const Dataset& d);
  bool has(std::uint32_t user, std::uint32_t item) const;
  double rating(std::uint32_t user, std::uint32_t item) const;  // 0 if absent
};

enum class KnnOrientation { user, item };

// Truncated neighbor model. Lists hold only entities with nonzero cosine
// similarity, sorted by (similarity desc, id asc), self excluded.
struct KnnModel {
  KnnOrientation orientation = KnnOrientation::user;
  int k = 0;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> neighbors;
  RatingMatrix ratings;
};

struct MfModel {
  int factors = 0;
  int iterations = 0;
  double learning_rate = 0.0;
  double lambda_user = 0.0;
  double lambda_item = 0.0;
  std::uint64_t seed = 0;
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::vector<double> user_factors;  // row-major n_users x factors
  std::vector<double> item_factors;  // row-major n_items x factors
};

// Top-N list for one user; scores non-increasing, ties by item id ascending.
struct RankedList {
  std::uint32_t user = 0;
  std::vector<std::uint32_t> items;
  std::vector<double> scores;
};

KnnModel train_user_knn(const Dataset& cv_train, int k);
KnnModel train_item_knn(const Dataset& cv_train, int k);
KnnModel train_user_knn(const RatingMatrix& m, int k);
KnnModel train_item_knn(const RatingMatrix& m, int k);

// Similarity-weighted rating sum over the truncated neighbor list.
double knn_score(const KnnModel& m, std::uint32_t user, std::uint32_t item);

// BPR-MF via SGD; one iteration = |cv_train| sampled (u, i, j) triples.
// Throws TrainingDivergedError if any factor goes non-finite.
MfModel train_bpr_mf(const Dataset& cv_train, const HyperConfig& cfg,
                     std::uint64_t seed);
MfModel train_bpr_mf(const RatingMatrix& m, const HyperConfig& cfg,
                     std::uint64_t seed);

double mf_score(const MfModel& m, std::uint32_t user, std::uint32_t item);

// All Unrated Items protocol: scores every item absent from the user's
// training profile, returns the top N by (score desc, item id asc).
RankedList recommend_top_n(const KnnModel& m, std::uint32_t user, int N);
RankedList recommend_top_n(const MfModel& m, const RatingMatrix& train,
                           std::uint32_t user, int N);

// Text container round-tripping a model exactly (factors in hex-float).
void save_knn_model(const KnnModel& m, const std::string& path);
KnnModel load_knn_model(const std::string& path, const Dataset& cv_train);
void save_mf_model(const MfModel& m, const std::string& path);
MfModel load_mf_model(const std::string& path);

}  // namespace recdp
