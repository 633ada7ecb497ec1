#include "profiler/fd.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <unordered_set>

#include "profiler/errors.hpp"
#include "profiler/parallel.hpp"

namespace profiler {

void FdDiscoveryConfig::validate() const {
  if (max_lhs < 1) throw Error(ErrorCode::kValidationError, "max_lhs must be at least 1");
  if (!(error_threshold >= 0.0 && error_threshold < 1.0)) {
    throw Error(ErrorCode::kValidationError, "error threshold must lie in [0, 1)");
  }
  if (thread_count < 1) throw Error(ErrorCode::kValidationError, "thread count must be positive");
}

bool within_threshold(std::size_t removals, std::size_t rows, double threshold) noexcept {
  return static_cast<double>(removals) <= threshold * static_cast<double>(rows) + 1e-9;
}

namespace {

/// Tallies codes inside one cluster; reused across clusters.
class CodeCounter {
 public:
  explicit CodeCounter(std::size_t code_count) : counts_(code_count, 0) {}

  /// Largest group of equal codes in `rows`. Null-distinct cells are groups of one.
  std::size_t max_group(std::span<RowIndex const> rows, std::span<std::int32_t const> codes) {
    std::size_t best = 0;
    for (auto row : rows) {
      auto code = codes[row];
      if (code == Column::kNoCode) {
        best = std::max<std::size_t>(best, 1);
        continue;
      }
      auto& count = counts_[static_cast<std::size_t>(code)];
      if (count == 0) touched_.push_back(code);
      best = std::max<std::size_t>(best, ++count);
    }
    reset();
    return best;
  }

  void add(std::int32_t code) {
    auto& count = counts_[static_cast<std::size_t>(code)];
    if (count == 0) touched_.push_back(code);
    ++count;
  }
  std::size_t count(std::int32_t code) const { return counts_[static_cast<std::size_t>(code)]; }
  std::span<std::int32_t const> touched() const { return touched_; }

  void reset() {
    for (auto code : touched_) counts_[static_cast<std::size_t>(code)] = 0;
    touched_.clear();
  }

 private:
  std::vector<std::uint32_t> counts_;
  std::vector<std::int32_t> touched_;
};

using ColumnMask = std::uint64_t;

std::vector<std::size_t> mask_to_columns(ColumnMask mask) {
  std::vector<std::size_t> out;
  while (mask) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

struct LatticeNode {
  ColumnMask columns = 0;
  ColumnMask candidates = 0;
  std::shared_ptr<StrippedPartition const> partition;
};

struct Level {
  std::vector<LatticeNode> nodes;
  std::unordered_map<ColumnMask, std::size_t> index;

  void rebuild_index() {
    index.clear();
    index.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].columns, i);
  }
  LatticeNode const* find(ColumnMask mask) const {
    auto it = index.find(mask);
    return it == index.end() ? nullptr : &nodes[it->second];
  }
  std::int64_t memory_bytes() const {
    std::int64_t total = 0;
    for (auto const& n : nodes) {
      if (n.partition) total += static_cast<std::int64_t>(n.partition->memory_bytes());
    }
    return total;
  }
};

class LatticeSearch {
 public:
  LatticeSearch(Table const& table, FdDiscoveryConfig const& config, ExecutionControl* control)
      : table_(table), config_(config), control_(control) {
    all_columns_ = table.column_count() == 64 ? ~ColumnMask{0} : (ColumnMask{1} << table.column_count()) - 1;
  }

  std::vector<Fd> run() {
    Level previous;
    previous.nodes.push_back({0, all_columns_, std::make_shared<StrippedPartition const>(
                                                   StrippedPartition::whole(table_.row_count()))});
    previous.rebuild_index();
    charge_memory(control_, previous.memory_bytes());

    Level current = first_level();
    std::size_t const last_level = std::min(config_.max_lhs + 1, table_.column_count());
    for (std::size_t level = 1; level <= last_level && !current.nodes.empty(); ++level) {
      checkpoint(control_);
      compute_dependencies(current, previous);
      prune(current);
      report_progress(control_, static_cast<double>(level) / static_cast<double>(last_level + 1));
      if (level == last_level) break;
      Level next = next_level(current);
      charge_memory(control_, -previous.memory_bytes());
      previous = std::move(current);
      current = std::move(next);
    }
    std::sort(found_.begin(), found_.end());
    return std::move(found_);
  }

 private:
  Level first_level() {
    Level level;
    level.nodes.resize(table_.column_count());
    parallel_for(table_.column_count(), config_.thread_count, [&](std::size_t c) {
      checkpoint(control_);
      level.nodes[c] = {ColumnMask{1} << c, 0, std::make_shared<StrippedPartition const>(build_pli(table_, c))};
    });
    level.rebuild_index();
    charge_memory(control_, level.memory_bytes());
    return level;
  }

  void compute_dependencies(Level& current, Level const& previous) {
    std::vector<std::vector<Fd>> per_node(current.nodes.size());
    parallel_for(current.nodes.size(), config_.thread_count, [&](std::size_t i) {
      checkpoint(control_);
      auto& node = current.nodes[i];
      ColumnMask candidates = all_columns_;
      for (auto column : mask_to_columns(node.columns)) {
        candidates &= previous.find(node.columns & ~(ColumnMask{1} << column))->candidates;
      }
      for (auto rhs : mask_to_columns(node.columns & candidates)) {
        ColumnMask lhs_mask = node.columns & ~(ColumnMask{1} << rhs);
        auto const* lhs_node = previous.find(lhs_mask);
        auto removals = g3_removals(*lhs_node->partition, table_.column(rhs));
        // The empty lhs only counts for constant columns, at any threshold.
        if (lhs_mask == 0 ? removals != 0 : !within_threshold(removals, table_.row_count(), config_.error_threshold)) {
          continue;
        }
        per_node[i].push_back(
            {mask_to_columns(lhs_mask), rhs, static_cast<double>(removals) / static_cast<double>(table_.row_count())});
        candidates &= ~(ColumnMask{1} << rhs);
        // An exact lhs -> rhs makes the partitions of lhs and lhs+rhs equal,
        // so no superset of this node can yield a minimal dependency on a
        // column outside it.
        if (removals == 0) candidates &= node.columns;
      }
      node.candidates = candidates;
    });
    for (auto& fds : per_node) {
      for (auto& fd : fds) found_.push_back(std::move(fd));
    }
  }

  void prune(Level& level) {
    std::int64_t released = 0;
    std::erase_if(level.nodes, [&](LatticeNode const& node) {
      if (node.candidates != 0) return false;
      released += static_cast<std::int64_t>(node.partition->memory_bytes());
      return true;
    });
    level.rebuild_index();
    charge_memory(control_, -released);
  }

  Level next_level(Level const& current) {
    // Nodes that differ only in their highest column share a prefix block.
    std::vector<std::size_t> order(current.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto prefix = [&](std::size_t i) {
      auto m = current.nodes[i].columns;
      return m & ~(ColumnMask{1} << (63 - std::countl_zero(m)));
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      auto pa = prefix(a), pb = prefix(b);
      return pa != pb ? pa < pb : current.nodes[a].columns < current.nodes[b].columns;
    });

    struct Pending {
      ColumnMask columns;
      std::size_t left;
      std::size_t right;
    };
    std::vector<Pending> pending;
    for (std::size_t a = 0; a < order.size(); ++a) {
      for (std::size_t b = a + 1; b < order.size() && prefix(order[a]) == prefix(order[b]); ++b) {
        ColumnMask merged = current.nodes[order[a]].columns | current.nodes[order[b]].columns;
        bool all_subsets_present = true;
        for (auto column : mask_to_columns(merged)) {
          if (!current.find(merged & ~(ColumnMask{1} << column))) {
            all_subsets_present = false;
            break;
          }
        }
        if (all_subsets_present) pending.push_back({merged, order[a], order[b]});
      }
    }
    std::sort(pending.begin(), pending.end(), [](auto const& x, auto const& y) { return x.columns < y.columns; });

    Level next;
    next.nodes.resize(pending.size());
    parallel_for(pending.size(), config_.thread_count, [&](std::size_t i) {
      checkpoint(control_);
      auto const& p = pending[i];
      next.nodes[i] = {p.columns, 0,
                       std::make_shared<StrippedPartition const>(intersect_pli(*current.nodes[p.left].partition,
                                                                               *current.nodes[p.right].partition))};
    });
    next.rebuild_index();
    charge_memory(control_, next.memory_bytes());
    return next;
  }

  Table const& table_;
  FdDiscoveryConfig const& config_;
  ExecutionControl* control_;
  ColumnMask all_columns_ = 0;
  std::vector<Fd> found_;
};

void check_columns(Table const& table, std::span<std::size_t const> lhs, std::size_t rhs) {
  for (auto c : lhs) table.column(c);
  table.column(rhs);
}

}  // namespace

std::size_t g3_removals(StrippedPartition const& lhs_partition, Column const& rhs) {
  CodeCounter counter(rhs.dictionary().size());
  auto codes = rhs.codes();
  std::size_t removals = 0;
  for (std::size_t i = 0; i < lhs_partition.cluster_count(); ++i) {
    auto cluster = lhs_partition.cluster(i);
    removals += cluster.size() - counter.max_group(cluster, codes);
  }
  return removals;
}

std::size_t g3_removals(Table const& table, std::span<std::size_t const> lhs, std::size_t rhs) {
  check_columns(table, lhs, rhs);
  return g3_removals(build_pli(table, lhs), table.column(rhs));
}

double fd_error(Table const& table, std::span<std::size_t const> lhs, std::size_t rhs) {
  auto removals = g3_removals(table, lhs, rhs);
  return table.row_count() == 0 ? 0.0 : static_cast<double>(removals) / static_cast<double>(table.row_count());
}

std::vector<Fd> discover_fds(Table const& table, FdDiscoveryConfig const& config, ExecutionControl* control) {
  config.validate();
  if (table.row_count() == 0) throw Error(ErrorCode::kEmptyInput, "table has no rows");
  if (table.column_count() > 64) {
    throw Error(ErrorCode::kValidationError, "dependency discovery supports at most 64 columns");
  }
  if (table.column_count() < 2) return {};
  return LatticeSearch(table, config, control).run();
}

std::vector<ViolationCluster> violation_clusters(Table const& table, StrippedPartition const& lhs_partition,
                                                 std::span<std::size_t const> lhs, std::size_t rhs) {
  auto const& rhs_column = table.column(rhs);
  auto codes = rhs_column.codes();
  CodeCounter counter(rhs_column.dictionary().size());
  std::vector<ViolationCluster> out;

  for (std::size_t i = 0; i < lhs_partition.cluster_count(); ++i) {
    auto cluster = lhs_partition.cluster(i);
    std::size_t nulls = 0;
    for (auto row : cluster) {
      if (codes[row] == Column::kNoCode) {
        ++nulls;
      } else {
        counter.add(codes[row]);
      }
    }
    std::size_t distinct = counter.touched().size() + nulls;
    if (distinct < 2) {
      counter.reset();
      continue;
    }

    ViolationCluster vc;
    std::int32_t majority = Column::kNoCode;
    std::size_t majority_count = nulls > 0 ? 1 : 0;
    for (auto code : counter.touched()) {
      auto count = counter.count(code);
      if (count > majority_count || (count == majority_count && (majority == Column::kNoCode || code < majority))) {
        majority = code;
        majority_count = count;
      }
    }
    counter.reset();

    vc.distinct_rhs_count = distinct;
    vc.majority_count = majority_count;
    if (majority != Column::kNoCode) vc.majority_rhs = rhs_column.dictionary()[static_cast<std::size_t>(majority)];
    for (auto c : lhs) {
      auto v = table.column(c).value(cluster.front());
      vc.lhs_value.push_back(v ? Cell(std::string(*v)) : Cell());
    }
    vc.rows.reserve(cluster.size());
    for (auto row : cluster) {
      auto v = rhs_column.value(row);
      vc.rows.push_back({row, v ? Cell(std::string(*v)) : Cell()});
    }
    out.push_back(std::move(vc));
  }
  std::stable_sort(out.begin(), out.end(), [](ViolationCluster const& a, ViolationCluster const& b) {
    if (a.rows.size() != b.rows.size()) return a.rows.size() > b.rows.size();
    return a.rows.front().row < b.rows.front().row;
  });
  return out;
}

FdValidationReport validate_fd(Table const& table, std::span<std::size_t const> lhs, std::size_t rhs,
                               double threshold) {
  check_columns(table, lhs, rhs);
  auto partition = build_pli(table, lhs);
  auto removals = g3_removals(partition, table.column(rhs));
  FdValidationReport report;
  report.error = table.row_count() == 0 ? 0.0 : static_cast<double>(removals) / static_cast<double>(table.row_count());
  report.holds = within_threshold(removals, table.row_count(), threshold);
  if (removals > 0) report.clusters = violation_clusters(table, partition, lhs, rhs);
  return report;
}

std::string format_real(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return ec == std::errc{} ? std::string(buffer, end) : std::to_string(value);
}

std::string to_string(Fd const& fd, Table const& table) {
  std::string out = "[";
  for (std::size_t i = 0; i < fd.lhs.size(); ++i) {
    if (i) out += ',';
    out += table.column(fd.lhs[i]).name();
  }
  out += "] -> ";
  out += table.column(fd.rhs).name();
  out += " (error=" + format_real(fd.error) + ")";
  return out;
}

}  // namespace profiler
