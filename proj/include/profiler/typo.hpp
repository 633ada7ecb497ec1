#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "profiler/execution.hpp"
#include "profiler/fd.hpp"
#include "profiler/table.hpp"

namespace profiler {

struct TypoPipelineConfig {
  /// An FD is "almost holding" when 0 < g3 <= error_threshold.
  double error_threshold = 0.05;
  std::size_t max_lhs = 3;
  std::size_t min_cluster_size = 2;
  std::size_t max_clusters_shown = 50;
  unsigned thread_count = 1;

  /// Throws Error{kValidationError}.
  void validate() const;
};

struct TypoCandidateCluster {
  ViolationCluster cluster;
  /// Rows whose rhs differs from the cluster's majority value.
  std::vector<RowIndex> suspect_rows;
  /// Minority share: (size - majority count) / size.
  double suspicion_score = 0.0;
};

struct TypoCandidates {
  Fd fd;
  std::vector<TypoCandidateCluster> clusters;  // largest first
};

/// Almost-holding FDs with their violation clusters, by ascending error.
std::vector<TypoCandidates> find_typo_candidates(Table const& table, TypoPipelineConfig const& config,
                                                 ExecutionControl* control = nullptr);

struct FixDecision {
  std::size_t row = 0;
  std::size_t column = 0;
  bool keep = false;
  Cell value;  // replacement when !keep; nullopt writes a null
};

/// New table with the decided cells replaced; the input is untouched.
/// Throws Error{kIndexOutOfRange}.
Table apply_fixes(Table const& table, std::span<FixDecision const> decisions);

/// "Replace every suspect value with the majority value" for one FD.
std::vector<FixDecision> majority_fixes(TypoCandidates const& candidates);

}  // namespace profiler
