#include "profiler/ind.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <memory>
#include <optional>
#include <queue>

#include "profiler/errors.hpp"
#include "profiler/parallel.hpp"

namespace profiler {

std::vector<std::string> sorted_distinct_values(Column const& column) {
  std::vector<std::string> values;
  values.reserve(column.dictionary().size());
  for (auto const& entry : column.dictionary()) {
    if (entry) values.push_back(*entry);
  }
  std::sort(values.begin(), values.end());
  return values;
}

namespace {

/// Forward cursor over one attribute's sorted distinct values.
class ValueCursor {
 public:
  virtual ~ValueCursor() = default;
  virtual bool valid() const = 0;
  virtual std::string const& value() const = 0;
  virtual void advance() = 0;
};

class MemoryCursor final : public ValueCursor {
 public:
  explicit MemoryCursor(std::vector<std::string> values) : values_(std::move(values)) {}
  bool valid() const override { return position_ < values_.size(); }
  std::string const& value() const override { return values_[position_]; }
  void advance() override { ++position_; }

 private:
  std::vector<std::string> values_;
  std::size_t position_ = 0;
};

/// Length-prefixed values in a temporary file, removed on destruction.
class SpilledCursor final : public ValueCursor {
 public:
  SpilledCursor(std::vector<std::string> const& values, std::filesystem::path path) : path_(std::move(path)) {
    {
      std::ofstream out(path_, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::kResourceLimitExceeded, "cannot create spill file " + path_.string());
      for (auto const& v : values) {
        std::uint64_t length = v.size();
        out.write(reinterpret_cast<char const*>(&length), sizeof(length));
        out.write(v.data(), static_cast<std::streamsize>(v.size()));
      }
      if (!out) throw Error(ErrorCode::kResourceLimitExceeded, "cannot write spill file " + path_.string());
    }
    in_.open(path_, std::ios::binary);
    advance();
  }
  ~SpilledCursor() override {
    in_.close();
    std::error_code ignored;
    std::filesystem::remove(path_, ignored);
  }

  bool valid() const override { return current_.has_value(); }
  std::string const& value() const override { return *current_; }
  void advance() override {
    std::uint64_t length = 0;
    if (!in_.read(reinterpret_cast<char*>(&length), sizeof(length))) {
      current_.reset();
      return;
    }
    std::string v(length, '\0');
    in_.read(v.data(), static_cast<std::streamsize>(length));
    current_ = std::move(v);
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::optional<std::string> current_;
};

/// Fixed-size bitset over attribute ids.
class AttributeSet {
 public:
  AttributeSet() = default;
  AttributeSet(std::size_t size, bool full) : words_((size + 63) / 64, full ? ~std::uint64_t{0} : 0), size_(size) {
    if (full && size % 64 != 0) words_.back() = (std::uint64_t{1} << (size % 64)) - 1;
  }
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void intersect(AttributeSet const& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
  }
  bool none() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
  }
  void clear() { std::fill(words_.begin(), words_.end(), 0); }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

std::atomic<std::uint64_t> spill_counter{0};

}  // namespace

std::vector<Ind> discover_unary_inds(std::span<Table const* const> tables, IndOptions const& options,
                                     ExecutionControl* control) {
  std::vector<ColumnRef> attributes;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    for (std::size_t c = 0; c < tables[t]->column_count(); ++c) attributes.push_back({t, c});
  }
  auto const n = attributes.size();

  std::vector<std::unique_ptr<ValueCursor>> cursors(n);
  parallel_for(n, options.thread_count, [&](std::size_t a) {
    checkpoint(control);
    auto const& ref = attributes[a];
    auto values = sorted_distinct_values(tables[ref.table]->column(ref.column));
    if (values.size() > options.spill_threshold) {
      auto path = options.spill_directory /
                  ("profiler-spill-" + std::to_string(reinterpret_cast<std::uintptr_t>(&cursors)) + "-" +
                   std::to_string(spill_counter.fetch_add(1)) + ".bin");
      cursors[a] = std::make_unique<SpilledCursor>(values, std::move(path));
    } else {
      std::int64_t bytes = 0;
      for (auto const& v : values) bytes += static_cast<std::int64_t>(sizeof(std::string) + v.capacity());
      charge_memory(control, bytes);
      cursors[a] = std::make_unique<MemoryCursor>(std::move(values));
    }
  });
  report_progress(control, 0.5);

  std::vector<AttributeSet> referenced(n, AttributeSet(n, true));
  using Entry = std::pair<std::string const*, std::size_t>;
  auto greater = [](Entry const& x, Entry const& y) {
    int cmp = x.first->compare(*y.first);
    return cmp != 0 ? cmp > 0 : x.second > y.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(greater)> heap(greater);
  for (std::size_t a = 0; a < n; ++a) {
    if (cursors[a]->valid()) heap.emplace(&cursors[a]->value(), a);
  }

  AttributeSet group(n, false);
  std::vector<std::size_t> members;
  std::size_t steps = 0;
  while (!heap.empty()) {
    if (++steps % 4096 == 0) checkpoint(control);
    std::string current = *heap.top().first;
    members.clear();
    group.clear();
    while (!heap.empty() && *heap.top().first == current) {
      members.push_back(heap.top().second);
      group.set(heap.top().second);
      heap.pop();
    }
    for (auto a : members) referenced[a].intersect(group);
    for (auto a : members) {
      cursors[a]->advance();
      if (cursors[a]->valid()) heap.emplace(&cursors[a]->value(), a);
    }
  }
  report_progress(control, 0.9);

  std::vector<Ind> out;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a != b && referenced[a].test(b)) out.push_back({attributes[a], attributes[b]});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

IndValidation validate_ind(std::span<Table const* const> tables, Ind const& ind, std::size_t max_missing) {
  auto column_of = [&](ColumnRef const& ref) -> Column const& {
    if (ref.table >= tables.size()) throw Error(ErrorCode::kUnknownTable, "table index out of range");
    if (ref.column >= tables[ref.table]->column_count()) {
      throw Error(ErrorCode::kUnknownColumn, "column index out of range in table '" + tables[ref.table]->name() + "'");
    }
    return tables[ref.table]->column(ref.column);
  };
  auto dependent = sorted_distinct_values(column_of(ind.dependent));
  auto referenced = sorted_distinct_values(column_of(ind.referenced));
  IndValidation result;
  auto r = referenced.begin();
  for (auto const& v : dependent) {
    r = std::lower_bound(r, referenced.end(), v);
    if (r != referenced.end() && *r == v) continue;
    result.holds = false;
    if (result.missing_values.size() < max_missing) {
      result.missing_values.push_back(v);
    } else {
      break;
    }
  }
  return result;
}

ColumnRef resolve_column(std::span<Table const* const> tables, std::string_view table_name,
                         std::string_view column_name) {
  for (std::size_t t = 0; t < tables.size(); ++t) {
    if (tables[t]->name() != table_name) continue;
    auto c = tables[t]->find_column(column_name);
    if (!c) {
      throw Error(ErrorCode::kUnknownColumn,
                  "no column '" + std::string(column_name) + "' in table '" + std::string(table_name) + "'");
    }
    return {t, *c};
  }
  throw Error(ErrorCode::kUnknownTable, "no table named '" + std::string(table_name) + "'");
}

std::string to_string(Ind const& ind, std::span<Table const* const> tables) {
  auto name = [&](ColumnRef const& ref) {
    return tables[ref.table]->name() + "." + tables[ref.table]->column(ref.column).name();
  };
  return name(ind.dependent) + " ⊆ " + name(ind.referenced);
}

}  // namespace profiler
