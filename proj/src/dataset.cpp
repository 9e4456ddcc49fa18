#include "recdp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "recdp/errors.hpp"
#include "recdp/rng.hpp"

namespace recdp {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Rebuilds a dataset from the selected interaction indices (in the given
// order), assigning fresh dense ids in first-appearance order.
Dataset rebuild(const Dataset& d, const std::vector<std::size_t>& keep) {
  Dataset out;
  out.interactions.reserve(keep.size());
  std::unordered_map<std::uint32_t, std::uint32_t> umap, imap;
  for (std::size_t idx : keep) {
    const Interaction& x = d.interactions[idx];
    auto [uit, unew] = umap.try_emplace(
        x.user, static_cast<std::uint32_t>(out.user_labels.size()));
    if (unew) out.user_labels.push_back(d.user_labels[x.user]);
    auto [iit, inew] = imap.try_emplace(
        x.item, static_cast<std::uint32_t>(out.item_labels.size()));
    if (inew) out.item_labels.push_back(d.item_labels[x.item]);
    out.interactions.push_back(
        {uit->second, iit->second, x.rating, x.timestamp});
  }
  return out;
}

}  // namespace

std::uint64_t Dataset::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Interaction& x : interactions) {
    h = fnv1a(h, user_labels[x.user].data(), user_labels[x.user].size());
    h = fnv1a(h, "\x1f", 1);
    h = fnv1a(h, item_labels[x.item].data(), item_labels[x.item].size());
    h = fnv1a(h, &x.rating, sizeof(x.rating));
    h = fnv1a(h, &x.timestamp, sizeof(x.timestamp));
  }
  return h;
}

Dataset load_interactions(const std::string& path, const TextFormat& fmt) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return load_interactions(in, fmt, path);
}

Dataset load_interactions(std::istream& in, const TextFormat& fmt,
                          const std::string& name) {
  Dataset raw;
  std::unordered_map<std::string, std::uint32_t> umap, imap;
  // key (user, item) -> position of the record currently kept
  std::unordered_map<std::uint64_t, std::size_t> latest;

  const int max_col =
      *std::max_element(fmt.columns.begin(), fmt.columns.end());
  std::string line;
  std::size_t lineno = 0;
  bool skipped_header = !fmt.has_header;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    fields.clear();
    std::size_t start = 0;
    for (;;) {
      std::size_t pos = line.find(fmt.delimiter, start);
      fields.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (static_cast<int>(fields.size()) <= max_col)
      throw ParseError(name, lineno, "expected at least " +
                                         std::to_string(max_col + 1) +
                                         " fields, got " +
                                         std::to_string(fields.size()));
    const std::string& us = fields[fmt.columns[0]];
    const std::string& is = fields[fmt.columns[1]];
    double rating;
    std::int64_t ts;
    try {
      rating = std::stod(fields[fmt.columns[2]]);
      ts = std::stoll(fields[fmt.columns[3]]);
    } catch (const std::exception&) {
      throw ParseError(name, lineno, "malformed rating or timestamp");
    }
    auto [uit, unew] =
        umap.try_emplace(us, static_cast<std::uint32_t>(raw.user_labels.size()));
    if (unew) raw.user_labels.push_back(us);
    auto [iit, inew] =
        imap.try_emplace(is, static_cast<std::uint32_t>(raw.item_labels.size()));
    if (inew) raw.item_labels.push_back(is);

    const std::uint64_t key =
        (static_cast<std::uint64_t>(uit->second) << 32) | iit->second;
    auto [lit, fresh] = latest.try_emplace(key, raw.interactions.size());
    if (fresh) {
      raw.interactions.push_back({uit->second, iit->second, rating, ts});
    } else {
      Interaction& kept = raw.interactions[lit->second];
      if (ts >= kept.timestamp) {
        kept.rating = rating;
        kept.timestamp = ts;
      }
    }
  }
  if (raw.interactions.empty())
    throw EmptyDatasetError("no interactions in " + name);
  return raw;
}

void save_interactions(const Dataset& d, const std::string& path,
                       const std::vector<std::string>& header_lines) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const std::string& h : header_lines) out << h << '\n';
  char buf[64];
  for (const Interaction& x : d.interactions) {
    std::snprintf(buf, sizeof(buf), "%.10g", x.rating);
    out << d.user_labels[x.user] << '\t' << d.item_labels[x.item] << '\t'
        << buf << '\t' << x.timestamp << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

Dataset filter_core(const Dataset& d, std::size_t min_user,
                    std::size_t min_item) {
  std::vector<std::size_t> user_deg(d.n_users(), 0);
  for (const Interaction& x : d.interactions) ++user_deg[x.user];

  std::vector<std::size_t> item_deg(d.n_items(), 0);
  for (const Interaction& x : d.interactions)
    if (user_deg[x.user] >= min_user) ++item_deg[x.item];

  std::vector<std::size_t> keep;
  keep.reserve(d.n_interactions());
  for (std::size_t i = 0; i < d.interactions.size(); ++i) {
    const Interaction& x = d.interactions[i];
    if (user_deg[x.user] >= min_user && item_deg[x.item] >= min_item)
      keep.push_back(i);
  }
  if (keep.empty())
    throw EmptyDatasetError("core filter removed every interaction");
  return rebuild(d, keep);
}

Dataset sample_stratified(const Dataset& d, double fraction,
                          std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("sample fraction must be in (0, 1]");
  // strata keyed by rating value, iterated in ascending order
  std::vector<double> values;
  for (const Interaction& x : d.interactions) values.push_back(x.rating);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<std::size_t> selected;
  Rng rng(seed);
  for (double v : values) {
    std::vector<std::size_t> stratum;
    for (std::size_t i = 0; i < d.interactions.size(); ++i)
      if (d.interactions[i].rating == v) stratum.push_back(i);
    const auto want = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(stratum.size())));
    rng.shuffle(stratum);
    stratum.resize(std::min(want, stratum.size()));
    selected.insert(selected.end(), stratum.begin(), stratum.end());
  }
  if (selected.empty()) throw EmptyDatasetError("sample produced no rows");
  std::sort(selected.begin(), selected.end());  // keep input order
  return rebuild(d, selected);
}

SplitPair temporal_holdout(const Dataset& d, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ConfigError("split ratio must be in (0, 1)");
  std::vector<std::vector<std::size_t>> by_user(d.n_users());
  for (std::size_t i = 0; i < d.interactions.size(); ++i)
    by_user[d.interactions[i].user].push_back(i);

  std::vector<std::size_t> train_idx, test_idx;
  for (auto& rows : by_user) {
    // rows are in input order; stable sort keeps that order on ties
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      return d.interactions[a].timestamp < d.interactions[b].timestamp;
    });
    const auto cut = static_cast<std::size_t>(
        std::ceil(ratio * static_cast<double>(rows.size())));
    for (std::size_t j = 0; j < rows.size(); ++j)
      (j < cut ? train_idx : test_idx).push_back(rows[j]);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  SplitPair out;
  out.ratio = ratio;
  out.train = rebuild(d, train_idx);
  out.test = rebuild(d, test_idx);
  return out;
}

FoldAssignment kfold_assign(const Dataset& train, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("fold count must be >= 2");
  std::vector<std::vector<std::size_t>> by_user(train.n_users());
  for (std::size_t i = 0; i < train.interactions.size(); ++i)
    by_user[train.interactions[i].user].push_back(i);

  FoldAssignment fa;
  fa.k = k;
  fa.fold.assign(train.n_interactions(), 0);
  for (std::size_t u = 0; u < by_user.size(); ++u) {
    auto& rows = by_user[u];
    Rng rng(derive_seed(seed, u));
    rng.shuffle(rows);
    for (std::size_t j = 0; j < rows.size(); ++j)
      fa.fold[rows[j]] = static_cast<int>(j % static_cast<std::size_t>(k));
  }
  return fa;
}

std::pair<Dataset, Dataset> fold_view(const Dataset& train,
                                      const FoldAssignment& fa, int held_out) {
  if (held_out < 0 || held_out >= fa.k)
    throw ConfigError("held-out fold out of range");
  Dataset cv_train, cv_valid;
  cv_train.user_labels = train.user_labels;
  cv_train.item_labels = train.item_labels;
  cv_valid.user_labels = train.user_labels;
  cv_valid.item_labels = train.item_labels;
  for (std::size_t i = 0; i < train.interactions.size(); ++i) {
    (fa.fold[i] == held_out ? cv_valid : cv_train)
        .interactions.push_back(train.interactions[i]);
  }
  return {std::move(cv_train), std::move(cv_valid)};
}

}  // namespace recdp
