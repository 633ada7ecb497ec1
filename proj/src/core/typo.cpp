#include "profiler/typo.hpp"

#include <algorithm>

#include "profiler/errors.hpp"

namespace profiler {

void TypoPipelineConfig::validate() const {
  if (!(error_threshold > 0.0 && error_threshold < 1.0)) {
    throw Error(ErrorCode::kValidationError, "typo pipeline threshold must lie in (0, 1)");
  }
  if (max_lhs < 1) throw Error(ErrorCode::kValidationError, "max_lhs must be at least 1");
  if (min_cluster_size < 2) throw Error(ErrorCode::kValidationError, "min_cluster_size must be at least 2");
  if (max_clusters_shown < 1) throw Error(ErrorCode::kValidationError, "max_clusters_shown must be positive");
  if (thread_count < 1) throw Error(ErrorCode::kValidationError, "thread count must be positive");
}

std::vector<TypoCandidates> find_typo_candidates(Table const& table, TypoPipelineConfig const& config,
                                                 ExecutionControl* control) {
  config.validate();
  FdDiscoveryConfig discovery{config.max_lhs, config.error_threshold, config.thread_count};
  auto fds = discover_fds(table, discovery, control);

  std::vector<TypoCandidates> out;
  for (auto& fd : fds) {
    if (fd.error <= 0.0) continue;
    checkpoint(control);
    auto partition = build_pli(table, fd.lhs);
    TypoCandidates candidates{fd, {}};
    for (auto& cluster : violation_clusters(table, partition, fd.lhs, fd.rhs)) {
      if (cluster.rows.size() < config.min_cluster_size) continue;
      if (candidates.clusters.size() >= config.max_clusters_shown) break;
      TypoCandidateCluster entry;
      for (auto const& row : cluster.rows) {
        if (row.rhs != cluster.majority_rhs) entry.suspect_rows.push_back(row.row);
      }
      entry.suspicion_score = static_cast<double>(cluster.rows.size() - cluster.majority_count) /
                              static_cast<double>(cluster.rows.size());
      entry.cluster = std::move(cluster);
      candidates.clusters.push_back(std::move(entry));
    }
    out.push_back(std::move(candidates));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](TypoCandidates const& a, TypoCandidates const& b) { return a.fd.error < b.fd.error; });
  return out;
}

Table apply_fixes(Table const& table, std::span<FixDecision const> decisions) {
  auto cells = table.cells();
  for (auto const& d : decisions) {
    if (d.row >= table.row_count() || d.column >= table.column_count()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "fix references cell (" + std::to_string(d.row) + ", " + std::to_string(d.column) +
                      ") outside the table");
    }
    if (!d.keep) cells[d.column][d.row] = d.value;
  }
  return Table(table.name(), table.column_names(), cells, table.options());
}

std::vector<FixDecision> majority_fixes(TypoCandidates const& candidates) {
  std::vector<FixDecision> out;
  for (auto const& entry : candidates.clusters) {
    for (auto row : entry.suspect_rows) {
      out.push_back({row, candidates.fd.rhs, false, entry.cluster.majority_rhs});
    }
  }
  return out;
}

}  // namespace profiler
