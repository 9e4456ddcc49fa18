#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace recdp {

// One explicit-feedback event. `user` and `item` are dense internal ids.
struct Interaction {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

// Immutable rating log with dense internal ids and the label tables mapping
// them back to external ids. n_users()/n_items() may exceed the ids actually
// present when the dataset is a view sharing a parent id space (fold views).
struct Dataset {
  std::vector<Interaction> interactions;
  std::vector<std::string> user_labels;
  std::vector<std::string> item_labels;

  std::size_t n_users() const { return user_labels.size(); }
  std::size_t n_items() const { return item_labels.size(); }
  std::size_t n_interactions() const { return interactions.size(); }

  // FNV-1a over the canonical serialization; used as a dataset fingerprint.
  std::uint64_t fingerprint() const;
};

// Delimiter-separated input description. `columns[f]` is the zero-based
// field position of user/item/rating/timestamp respectively.
struct TextFormat {
  char delimiter = '\t';
  std::array<int, 4> columns = {0, 1, 2, 3};
  bool has_header = false;
};

struct SplitPair {
  Dataset train;
  Dataset test;
  double ratio = 0.0;
};

// fold[i] is the fold of train.interactions[i].
struct FoldAssignment {
  int k = 0;
  std::vector<int> fold;
};

// Reads a rating log. Ids are assigned in first-appearance order; duplicate
// (user, item) records are collapsed keeping the latest timestamp (ties:
// later input line wins). Lines starting with '#' are skipped.
Dataset load_interactions(const std::string& path, const TextFormat& fmt = {});
Dataset load_interactions(std::istream& in, const TextFormat& fmt,
                          const std::string& name);

// Writes the canonical tab-separated form (user, item, rating, timestamp),
// preceded by the given metadata comment lines (already '#'-prefixed).
void save_interactions(const Dataset& d, const std::string& path,
                       const std::vector<std::string>& header_lines = {});

// Single-pass core filter: drops users with < min_user interactions, then
// items with < min_item interactions among the remainder; re-densifies ids.
Dataset filter_core(const Dataset& d, std::size_t min_user,
                    std::size_t min_item);

// Per-rating-value stratified sample of ceil(fraction * stratum size)
// interactions, uniform without replacement; re-densifies ids.
Dataset sample_stratified(const Dataset& d, double fraction,
                          std::uint64_t seed);

// Per-user chronological split: the first ceil(ratio * n_u) interactions in
// (timestamp, input-order) order train, the rest test. Both sides are
// re-densified independently.
SplitPair temporal_holdout(const Dataset& d, double ratio);

// Per-user stratified k-fold assignment: each user's rows are shuffled with
// a seed derived from (seed, user) and dealt round-robin to folds.
FoldAssignment kfold_assign(const Dataset& train, int k, std::uint64_t seed);

// Splits `train` into (cv_train, cv_valid) for one held-out fold. Id spaces
// are inherited from `train` so item popularity is comparable across folds.
std::pair<Dataset, Dataset> fold_view(const Dataset& train,
                                      const FoldAssignment& fa, int held_out);

}  // namespace recdp
