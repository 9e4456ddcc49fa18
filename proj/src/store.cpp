#include "recdp/store.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "recdp/errors.hpp"

namespace recdp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cell_key(const std::string& config_id, int fold,
                     const std::string& metric = {}) {
  return config_id + "/" + std::to_string(fold) +
         (metric.empty() ? "" : "/" + metric);
}

}  // namespace

std::uint64_t hash_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void save_metric_matrix(const MetricMatrix& m, const fs::path& p,
                        const std::vector<std::string>& header_lines) {
  std::ofstream out(p);
  if (!out) throw DataError("cannot write " + p.string());
  for (const std::string& h : header_lines) out << h << '\n';
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", m.mean);
  out << m.metric << '\t' << m.N << '\t' << m.config_id << '\t' << m.fold
      << '\t' << buf << '\n';
  for (std::size_t i = 0; i < m.users.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.10g", m.values[i]);
    out << m.users[i] << '\t' << buf << '\n';
  }
  if (!out) throw DataError("write failed for " + p.string());
}

MetricMatrix load_metric_matrix(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  MetricMatrix m;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    if (!have_header) {
      ss >> m.metric >> m.N >> m.config_id >> m.fold >> m.mean;
      have_header = true;
      continue;
    }
    std::uint32_t u;
    double v;
    ss >> u >> v;
    m.users.push_back(u);
    m.values.push_back(v);
  }
  if (!have_header) throw DataError(p.string() + ": empty matrix file");
  return m;
}

MetricStore::MetricStore(fs::path dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) fs::create_directories(dir_);
}

fs::path MetricStore::cell_dir(const std::string& config_id, int fold) const {
  return dir_ / config_id / ("fold" + std::to_string(fold));
}

bool MetricStore::has_cell(const std::string& config_id, int fold) const {
  if (dir_.empty()) {
    std::lock_guard lk(mu_);
    return cache_.count(cell_key(config_id, fold, kMetricNames.front())) > 0;
  }
  const fs::path cd = cell_dir(config_id, fold);
  const fs::path manifest = cd / "cell.json";
  if (!fs::exists(manifest)) return false;
  try {
    std::ifstream in(manifest);
    const json j = json::parse(in);
    for (const auto& [name, hash] : j.at("files").items()) {
      const fs::path f = cd / name;
      if (!fs::exists(f)) return false;
      if (hash.get<std::uint64_t>() != hash_file(f)) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

bool MetricStore::cell_failed(const std::string& config_id, int fold) const {
  if (dir_.empty()) {
    auto it = memory_failed_.find(cell_key(config_id, fold));
    return it != memory_failed_.end() && it->second;
  }
  return fs::exists(cell_dir(config_id, fold) / "failed.json");
}

void MetricStore::put_cell(const std::string& config_id, int fold,
                           const std::vector<MetricMatrix>& matrices,
                           const std::vector<std::string>& header_lines) {
  if (dir_.empty()) {
    std::lock_guard lk(mu_);
    for (const MetricMatrix& m : matrices)
      cache_[cell_key(config_id, fold, m.metric)] = m;
    return;
  }
  const fs::path cd = cell_dir(config_id, fold);
  fs::create_directories(cd);
  json files = json::object();
  for (const MetricMatrix& m : matrices) {
    const fs::path f = cd / (m.metric + ".tsv");
    save_metric_matrix(m, f, header_lines);
    files[m.metric + ".tsv"] = hash_file(f);
  }
  json manifest;
  manifest["config_id"] = config_id;
  manifest["fold"] = fold;
  manifest["files"] = files;
  std::ofstream out(cd / "cell.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw DataError("write failed for " + (cd / "cell.json").string());
}

void MetricStore::mark_failed(const std::string& config_id, int fold,
                              const std::string& reason) {
  if (dir_.empty()) {
    std::lock_guard lk(mu_);
    memory_failed_[cell_key(config_id, fold)] = true;
    return;
  }
  const fs::path cd = cell_dir(config_id, fold);
  fs::create_directories(cd);
  json j;
  j["config_id"] = config_id;
  j["fold"] = fold;
  j["reason"] = reason;
  std::ofstream out(cd / "failed.json");
  out << j.dump(2) << '\n';
}

const MetricMatrix& MetricStore::get(const std::string& config_id, int fold,
                                     const std::string& metric) const {
  const std::string key = cell_key(config_id, fold, metric);
  std::lock_guard lk(mu_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  if (dir_.empty())
    throw DataError("missing cell " + key + " in memory store");
  const fs::path f = cell_dir(config_id, fold) / (metric + ".tsv");
  if (!fs::exists(f)) throw DataError("missing cell file " + f.string());
  auto [nit, ok] = cache_.emplace(key, load_metric_matrix(f));
  return nit->second;
}

}  // namespace recdp
