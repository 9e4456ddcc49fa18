#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "recdp/metrics.hpp"

namespace recdp {

// Keyed store of per-user metric matrices, one cell per (config, fold).
// With a backing directory, cells persist as
//   <dir>/<config-id>/fold<k>/<metric>.tsv
// plus a manifest recording content hashes; a cell whose files still match
// its manifest is considered complete and is skipped on re-runs. Without a
// directory the store is memory-only.
class MetricStore {
 public:
  MetricStore() = default;
  explicit MetricStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  bool has_cell(const std::string& config_id, int fold) const;
  bool cell_failed(const std::string& config_id, int fold) const;

  void put_cell(const std::string& config_id, int fold,
                const std::vector<MetricMatrix>& matrices,
                const std::vector<std::string>& header_lines = {});
  void mark_failed(const std::string& config_id, int fold,
                   const std::string& reason);

  // Loads (and caches) one matrix; throws DataError if the cell is absent.
  const MetricMatrix& get(const std::string& config_id, int fold,
                          const std::string& metric) const;

 private:
  std::filesystem::path cell_dir(const std::string& config_id, int fold) const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  mutable std::map<std::string, MetricMatrix> cache_;
  std::map<std::string, bool> memory_failed_;
};

// TSV round-trip for one matrix (header row: metric, N, config id, fold id;
// then user<TAB>value rows, 10 significant digits).
void save_metric_matrix(const MetricMatrix& m, const std::filesystem::path& p,
                        const std::vector<std::string>& header_lines = {});
MetricMatrix load_metric_matrix(const std::filesystem::path& p);

std::uint64_t hash_file(const std::filesystem::path& p);

}  // namespace recdp
