#include "recdp/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "recdp/errors.hpp"

namespace recdp {

namespace {

bool contains(const std::vector<std::uint32_t>& sorted, std::uint32_t v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

double log2_discount(int rank1based) {
  return 1.0 / std::log2(static_cast<double>(rank1based) + 1.0);
}

}  // namespace

RelevanceJudgments judge(const Dataset& cv_valid, double tau, bool strict) {
  RelevanceJudgments rel;
  rel.relevant.resize(cv_valid.n_users());
  for (const Interaction& x : cv_valid.interactions) {
    if (strict ? x.rating > tau : x.rating >= tau)
      rel.relevant[x.user].push_back(x.item);
  }
  for (auto& r : rel.relevant) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return rel;
}

PopularityModel build_popularity(const Dataset& cv_train) {
  PopularityModel pop;
  pop.n_users = cv_train.n_users();
  pop.count.assign(cv_train.n_items(), 0);
  pop.seen.assign(cv_train.n_items(), 0);
  for (const Interaction& x : cv_train.interactions) {
    ++pop.count[x.item];
    ++pop.seen[x.item];  // (user, item) pairs are unique after ingestion
    ++pop.total;
  }
  return pop;
}

double precision_at(const RankedList& list,
                    const std::vector<std::uint32_t>& rel, int N) {
  const std::size_t depth = std::min<std::size_t>(N, list.items.size());
  std::size_t hits = 0;
  for (std::size_t k = 0; k < depth; ++k)
    if (contains(rel, list.items[k])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(N);
}

double recall_at(const RankedList& list, const std::vector<std::uint32_t>& rel,
                 int N) {
  if (rel.empty()) throw InsufficientDataError("recall needs relevant items");
  const std::size_t depth = std::min<std::size_t>(N, list.items.size());
  std::size_t hits = 0;
  for (std::size_t k = 0; k < depth; ++k)
    if (contains(rel, list.items[k])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(rel.size());
}

double ndcg_at(const RankedList& list, const std::vector<std::uint32_t>& rel,
               int N) {
  if (rel.empty()) throw InsufficientDataError("ndcg needs relevant items");
  const std::size_t depth = std::min<std::size_t>(N, list.items.size());
  double dcg = 0.0;
  for (std::size_t k = 0; k < depth; ++k)
    if (contains(rel, list.items[k]))
      dcg += log2_discount(static_cast<int>(k) + 1);
  const std::size_t ideal = std::min<std::size_t>(N, rel.size());
  double idcg = 0.0;
  for (std::size_t k = 0; k < ideal; ++k)
    idcg += log2_discount(static_cast<int>(k) + 1);
  return dcg / idcg;
}

double mrr_at(const RankedList& list, const std::vector<std::uint32_t>& rel,
              int N) {
  const std::size_t depth = std::min<std::size_t>(N, list.items.size());
  for (std::size_t k = 0; k < depth; ++k)
    if (contains(rel, list.items[k]))
      return 1.0 / static_cast<double>(k + 1);
  return 0.0;
}

double efd_at(const RankedList& list, const PopularityModel& pop, int N,
              bool rank_discount) {
  const std::size_t depth = std::min<std::size_t>(N, list.items.size());
  if (depth == 0) return 0.0;
  double sum = 0.0, wsum = 0.0;
  for (std::size_t k = 0; k < depth; ++k) {
    const std::int64_t c = pop.count[list.items[k]];
    const double p = c > 0 ? static_cast<double>(c) /
                                 static_cast<double>(pop.total)
                           : 1.0 / static_cast<double>(pop.total + 1);
    const double w = rank_discount ? log2_discount(static_cast<int>(k) + 1)
                                   : 1.0;
    sum += w * -std::log2(p);
    wsum += w;
  }
  return sum / wsum;
}

double epc_at(const RankedList& list, const PopularityModel& pop, int N,
              bool rank_discount) {
  const std::size_t depth = std::min<std::size_t>(N, list.items.size());
  if (depth == 0) return 0.0;
  double sum = 0.0, wsum = 0.0;
  for (std::size_t k = 0; k < depth; ++k) {
    const double seen = static_cast<double>(pop.seen[list.items[k]]) /
                        static_cast<double>(pop.n_users);
    const double w = rank_discount ? log2_discount(static_cast<int>(k) + 1)
                                   : 1.0;
    sum += w * (1.0 - seen);
    wsum += w;
  }
  return sum / wsum;
}

std::vector<MetricMatrix> evaluate_system(const std::vector<RankedList>& lists,
                                          const RelevanceJudgments& rel,
                                          const PopularityModel& pop,
                                          const EvalOptions& opt,
                                          const std::string& config_id,
                                          int fold) {
  std::vector<std::uint32_t> users;
  for (std::uint32_t u = 0; u < lists.size(); ++u) {
    if (u < rel.relevant.size() && !rel.relevant[u].empty() &&
        !lists[u].items.empty())
      users.push_back(u);
  }
  if (users.empty())
    throw InsufficientDataError("no evaluable users in fold " +
                                std::to_string(fold));

  std::vector<MetricMatrix> out;
  out.reserve(kMetricNames.size());
  for (const std::string& name : kMetricNames) {
    MetricMatrix m;
    m.metric = name;
    m.N = opt.N;
    m.config_id = config_id;
    m.fold = fold;
    m.users = users;
    m.values.reserve(users.size());
    for (std::uint32_t u : users) {
      const RankedList& l = lists[u];
      const auto& r = rel.relevant[u];
      double v = 0.0;
      if (name == "ndcg") v = ndcg_at(l, r, opt.N);
      else if (name == "prec") v = precision_at(l, r, opt.N);
      else if (name == "rec") v = recall_at(l, r, opt.N);
      else if (name == "mrr") v = mrr_at(l, r, opt.N);
      else if (name == "efd") v = efd_at(l, pop, opt.N, opt.rank_discount);
      else v = epc_at(l, pop, opt.N, opt.rank_discount);
      m.values.push_back(v);
    }
    double s = 0.0;
    for (double v : m.values) s += v;
    m.mean = s / static_cast<double>(m.values.size());
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace recdp
