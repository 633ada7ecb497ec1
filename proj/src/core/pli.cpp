#include "profiler/pli.hpp"

#include <algorithm>

#include "profiler/errors.hpp"

namespace profiler {

StrippedPartition::StrippedPartition(std::vector<RowIndex> rows, std::vector<std::size_t> offsets,
                                     std::vector<std::size_t> over_columns, std::size_t source_row_count)
    : rows_(std::move(rows)),
      offsets_(std::move(offsets)),
      over_columns_(std::move(over_columns)),
      source_row_count_(source_row_count) {
  std::sort(over_columns_.begin(), over_columns_.end());
  over_columns_.erase(std::unique(over_columns_.begin(), over_columns_.end()), over_columns_.end());
  if (offsets_.size() == 1) offsets_.clear();
}

StrippedPartition StrippedPartition::from_clusters(std::vector<std::vector<RowIndex>> const& clusters,
                                                   std::vector<std::size_t> over_columns,
                                                   std::size_t source_row_count) {
  std::vector<RowIndex> rows;
  std::vector<std::size_t> offsets{0};
  for (auto const& cluster : clusters) {
    if (cluster.size() < 2) continue;
    auto start = rows.size();
    rows.insert(rows.end(), cluster.begin(), cluster.end());
    std::sort(rows.begin() + static_cast<std::ptrdiff_t>(start), rows.end());
    offsets.push_back(rows.size());
  }
  return StrippedPartition(std::move(rows), std::move(offsets), std::move(over_columns), source_row_count);
}

StrippedPartition StrippedPartition::whole(std::size_t source_row_count) {
  if (source_row_count < 2) return StrippedPartition({}, {}, {}, source_row_count);
  std::vector<RowIndex> rows(source_row_count);
  for (std::size_t i = 0; i < source_row_count; ++i) rows[i] = static_cast<RowIndex>(i);
  return StrippedPartition(std::move(rows), {0, source_row_count}, {}, source_row_count);
}

std::span<RowIndex const> StrippedPartition::cluster(std::size_t i) const {
  if (i >= cluster_count()) throw Error(ErrorCode::kIndexOutOfRange, "cluster index out of range");
  return std::span<RowIndex const>(rows_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

std::vector<std::vector<RowIndex>> StrippedPartition::clusters() const {
  std::vector<std::vector<RowIndex>> out;
  out.reserve(cluster_count());
  for (std::size_t i = 0; i < cluster_count(); ++i) {
    auto c = cluster(i);
    out.emplace_back(c.begin(), c.end());
  }
  return out;
}

std::vector<std::vector<RowIndex>> StrippedPartition::canonical_clusters() const {
  auto out = clusters();
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t StrippedPartition::memory_bytes() const noexcept {
  return sizeof(*this) + rows_.capacity() * sizeof(RowIndex) + offsets_.capacity() * sizeof(std::size_t) +
         over_columns_.capacity() * sizeof(std::size_t);
}

StrippedPartition build_pli(Table const& table, std::size_t column_index) {
  auto const& column = table.column(column_index);
  auto codes = column.codes();
  auto const code_count = column.dictionary().size();

  // Counting sort by code keeps rows ascending inside each class.
  std::vector<std::size_t> counts(code_count + 1, 0);
  for (auto code : codes) {
    if (code != Column::kNoCode) ++counts[static_cast<std::size_t>(code) + 1];
  }
  std::vector<std::size_t> starts(code_count + 1, 0);
  for (std::size_t c = 0; c < code_count; ++c) starts[c + 1] = starts[c] + counts[c + 1];
  std::vector<RowIndex> sorted(starts[code_count]);
  auto fill = starts;
  for (std::size_t row = 0; row < codes.size(); ++row) {
    if (codes[row] != Column::kNoCode) sorted[fill[static_cast<std::size_t>(codes[row])]++] = static_cast<RowIndex>(row);
  }

  std::vector<RowIndex> rows;
  std::vector<std::size_t> offsets{0};
  for (std::size_t c = 0; c < code_count; ++c) {
    if (counts[c + 1] < 2) continue;
    rows.insert(rows.end(), sorted.begin() + static_cast<std::ptrdiff_t>(starts[c]),
                sorted.begin() + static_cast<std::ptrdiff_t>(starts[c + 1]));
    offsets.push_back(rows.size());
  }
  return StrippedPartition(std::move(rows), std::move(offsets), {column_index}, table.row_count());
}

StrippedPartition build_pli(Table const& table, std::span<std::size_t const> columns) {
  if (columns.empty()) return StrippedPartition::whole(table.row_count());
  auto result = build_pli(table, columns.front());
  for (auto column : columns.subspan(1)) result = intersect_pli(result, build_pli(table, column));
  return result;
}

StrippedPartition intersect_pli(StrippedPartition const& lhs, StrippedPartition const& rhs) {
  if (lhs.source_row_count() != rhs.source_row_count()) {
    throw Error(ErrorCode::kSourceMismatch, "partitions come from tables with different row counts");
  }
  std::vector<std::size_t> over = lhs.over_columns();
  over.insert(over.end(), rhs.over_columns().begin(), rhs.over_columns().end());

  constexpr std::uint32_t kUnset = UINT32_MAX;
  std::vector<std::uint32_t> probe(lhs.source_row_count(), kUnset);
  for (std::size_t i = 0; i < rhs.cluster_count(); ++i) {
    for (auto row : rhs.cluster(i)) probe[row] = static_cast<std::uint32_t>(i);
  }

  std::vector<RowIndex> rows;
  std::vector<std::size_t> offsets{0};
  // Per lhs cluster: bucket rows by rhs cluster id, in first-seen order.
  std::vector<std::vector<RowIndex>> buckets(rhs.cluster_count());
  std::vector<std::uint32_t> touched;
  for (std::size_t i = 0; i < lhs.cluster_count(); ++i) {
    for (auto row : lhs.cluster(i)) {
      auto id = probe[row];
      if (id == kUnset) continue;
      if (buckets[id].empty()) touched.push_back(id);
      buckets[id].push_back(row);
    }
    for (auto id : touched) {
      auto& bucket = buckets[id];
      if (bucket.size() >= 2) {
        rows.insert(rows.end(), bucket.begin(), bucket.end());
        offsets.push_back(rows.size());
      }
      bucket.clear();
    }
    touched.clear();
  }
  return StrippedPartition(std::move(rows), std::move(offsets), std::move(over), lhs.source_row_count());
}

}  // namespace profiler
