#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recdp/dataset.hpp"
#include "recdp/recommenders.hpp"

namespace recdp {

// Binary relevance judgments: per user, the sorted validation items whose
// rating clears the threshold.
struct RelevanceJudgments {
  std::vector<std::vector<std::uint32_t>> relevant;  // indexed by user id
};

// Item popularity in the cv-training fold. count(i) drives EFD, seen(i)
// (distinct raters) drives EPC.
struct PopularityModel {
  std::vector<std::int64_t> count;
  std::vector<std::int64_t> seen;
  std::int64_t total = 0;
  std::size_t n_users = 0;
};

// Per-user values of one metric in one (config, fold) cell. User lists are
// sorted and identical across the metrics of a cell so t-tests pair by user.
struct MetricMatrix {
  std::string metric;
  int N = 0;
  std::string config_id;
  int fold = 0;
  std::vector<std::uint32_t> users;
  std::vector<double> values;
  double mean = 0.0;
};

inline const std::vector<std::string> kMetricNames = {
    "ndcg", "prec", "rec", "mrr", "efd", "epc"};

// `strict` switches "rating >= tau" to "rating > tau".
RelevanceJudgments judge(const Dataset& cv_valid, double tau,
                         bool strict = false);

PopularityModel build_popularity(const Dataset& cv_train);

// `rel` must be sorted ascending.
double precision_at(const RankedList& list,
                    const std::vector<std::uint32_t>& rel, int N);
double recall_at(const RankedList& list, const std::vector<std::uint32_t>& rel,
                 int N);
double ndcg_at(const RankedList& list, const std::vector<std::uint32_t>& rel,
               int N);
double mrr_at(const RankedList& list, const std::vector<std::uint32_t>& rel,
              int N);

// Novelty metrics; `rank_discount` weights position k by 1/log2(k+1)
// (normalized), default is the uniform-discount variant.
double efd_at(const RankedList& list, const PopularityModel& pop, int N,
              bool rank_discount = false);
double epc_at(const RankedList& list, const PopularityModel& pop, int N,
              bool rank_discount = false);

struct EvalOptions {
  int N = 10;
  bool rank_discount = false;
};

// Computes all six metrics per user. The evaluated population is the set of
// users with a non-empty relevant set and a non-empty ranked list, identical
// across metrics. `lists` is indexed by user id; users without a list get an
// empty RankedList. Throws if no user is evaluable.
std::vector<MetricMatrix> evaluate_system(const std::vector<RankedList>& lists,
                                          const RelevanceJudgments& rel,
                                          const PopularityModel& pop,
                                          const EvalOptions& opt,
                                          const std::string& config_id,
                                          int fold);

}  // namespace recdp
