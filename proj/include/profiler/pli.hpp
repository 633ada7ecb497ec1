#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "profiler/table.hpp"

namespace profiler {

/// Stripped partition (position list index): the equivalence classes of rows
/// under equality on `over_columns()`, with singleton classes removed.
///
/// Clusters are stored flat: cluster i is rows()[offsets[i], offsets[i+1]).
/// Row indexes inside a cluster are ascending.
class StrippedPartition {
 public:
  StrippedPartition() = default;
  StrippedPartition(std::vector<RowIndex> rows, std::vector<std::size_t> offsets, std::vector<std::size_t> over_columns,
                    std::size_t source_row_count);

  /// Builds from explicit clusters; clusters of size < 2 are dropped.
  static StrippedPartition from_clusters(std::vector<std::vector<RowIndex>> const& clusters,
                                         std::vector<std::size_t> over_columns, std::size_t source_row_count);

  /// Partition of the empty column set: all rows in one class.
  static StrippedPartition whole(std::size_t source_row_count);

  std::size_t cluster_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<RowIndex const> cluster(std::size_t i) const;
  std::vector<std::vector<RowIndex>> clusters() const;

  /// Sum of cluster sizes.
  std::size_t covered_rows() const noexcept { return rows_.size(); }
  std::size_t source_row_count() const noexcept { return source_row_count_; }
  std::vector<std::size_t> const& over_columns() const noexcept { return over_columns_; }

  /// No two rows agree: the column set is a key.
  bool empty() const noexcept { return rows_.empty(); }

  std::size_t memory_bytes() const noexcept;

  /// Clusters sorted by first row. Two partitions are equal iff these match.
  std::vector<std::vector<RowIndex>> canonical_clusters() const;

 private:
  std::vector<RowIndex> rows_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> over_columns_;
  std::size_t source_row_count_ = 0;
};

/// Throws Error{kIndexOutOfRange}.
StrippedPartition build_pli(Table const& table, std::size_t column_index);

/// Partition over a column set, by repeated intersection. An empty set yields
/// StrippedPartition::whole.
StrippedPartition build_pli(Table const& table, std::span<std::size_t const> columns);

/// Product partition. Throws Error{kSourceMismatch} when the source row
/// counts differ.
StrippedPartition intersect_pli(StrippedPartition const& lhs, StrippedPartition const& rhs);

}  // namespace profiler
