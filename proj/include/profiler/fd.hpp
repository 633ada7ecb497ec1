#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "profiler/execution.hpp"
#include "profiler/pli.hpp"
#include "profiler/table.hpp"

namespace profiler {

/// Functional dependency lhs -> rhs with its g3 error.
struct Fd {
  std::vector<std::size_t> lhs;  // ascending
  std::size_t rhs = 0;
  double error = 0.0;

  friend bool operator==(Fd const& a, Fd const& b) { return a.lhs == b.lhs && a.rhs == b.rhs; }
  friend bool operator<(Fd const& a, Fd const& b) {
    return a.lhs != b.lhs ? a.lhs < b.lhs : a.rhs < b.rhs;
  }
};

struct FdDiscoveryConfig {
  std::size_t max_lhs = 4;
  double error_threshold = 0.0;
  unsigned thread_count = 1;

  /// Throws Error{kValidationError}.
  void validate() const;
};

/// g3 numerator: the minimum number of rows to delete so that the dependency
/// holds exactly.
std::size_t g3_removals(StrippedPartition const& lhs_partition, Column const& rhs);
std::size_t g3_removals(Table const& table, std::span<std::size_t const> lhs, std::size_t rhs);

/// g3 = g3_removals / row_count, in [0, 1). Throws Error{kIndexOutOfRange}.
double fd_error(Table const& table, std::span<std::size_t const> lhs, std::size_t rhs);

/// removals / rows <= threshold, evaluated without division.
bool within_threshold(std::size_t removals, std::size_t rows, double threshold) noexcept;

/// Minimal dependencies with error <= threshold and |lhs| <= max_lhs, sorted
/// by (lhs, rhs). Level-wise lattice search over stripped partitions; the
/// candidate set of every node shrinks as dependencies are found, so no
/// dependency with a valid generalization is emitted. An empty lhs is
/// reported only for constant columns, whatever the threshold. Limited to
/// 64 columns.
///
/// Throws Error{kEmptyInput} for a table without rows, and whatever the
/// control raises (kCancelled, kResourceLimitExceeded). Results are the same
/// for any thread_count.
std::vector<Fd> discover_fds(Table const& table, FdDiscoveryConfig const& config,
                             ExecutionControl* control = nullptr);

/// Rows sharing one lhs value but disagreeing on rhs.
struct ViolationCluster {
  struct Entry {
    RowIndex row = 0;
    Cell rhs;
  };
  std::vector<Cell> lhs_value;
  std::vector<Entry> rows;
  std::size_t distinct_rhs_count = 0;
  /// Most frequent rhs value; ties go to the smallest dictionary code.
  Cell majority_rhs;
  std::size_t majority_count = 0;
};

struct FdValidationReport {
  bool holds = true;
  double error = 0.0;
  std::vector<ViolationCluster> clusters;
};

/// Violating clusters of lhs -> rhs, largest first (ties by first row).
std::vector<ViolationCluster> violation_clusters(Table const& table, StrippedPartition const& lhs_partition,
                                                 std::span<std::size_t const> lhs, std::size_t rhs);

FdValidationReport validate_fd(Table const& table, std::span<std::size_t const> lhs, std::size_t rhs,
                               double threshold);

/// "[A,B] -> C (error=0.25)"
std::string to_string(Fd const& fd, Table const& table);

/// Shortest round-trip decimal form.
std::string format_real(double value);

}  // namespace profiler
