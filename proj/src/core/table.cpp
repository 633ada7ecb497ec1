#include "profiler/table.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "profiler/errors.hpp"

namespace profiler {

std::string_view column_type_name(ColumnType type) noexcept {
  switch (type) {
    case ColumnType::kInteger: return "integer";
    case ColumnType::kReal: return "real";
    case ColumnType::kText: return "text";
    case ColumnType::kEmpty: return "empty";
  }
  return "text";
}

bool parses_as_integer(std::string_view text) noexcept {
  if (!text.empty() && (text.front() == '+' || text.front() == '-')) text.remove_prefix(1);
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::optional<double> parse_number(std::string_view text) noexcept {
  bool negative = false;
  if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  // from_chars accepts inf/nan spellings; those are not decimal numbers here.
  if (text.empty() || !(std::isdigit(static_cast<unsigned char>(text.front())) || text.front() == '.')) {
    return std::nullopt;
  }
  double value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return negative ? -value : value;
}

ColumnType infer_type(std::span<Cell const> cells) {
  bool any = false;
  bool all_integer = true;
  bool all_numeric = true;
  for (auto const& cell : cells) {
    if (!cell) continue;
    any = true;
    if (all_integer && !parses_as_integer(*cell)) all_integer = false;
    if (!all_integer && all_numeric && !parse_number(*cell)) {
      all_numeric = false;
      break;
    }
  }
  if (!any) return ColumnType::kEmpty;
  if (all_integer) return ColumnType::kInteger;
  return all_numeric ? ColumnType::kReal : ColumnType::kText;
}

Column::Column(std::string name, std::span<Cell const> cells, NullMode null_mode)
    : name_(std::move(name)), type_(infer_type(cells)) {
  codes_.reserve(cells.size());
  std::unordered_map<std::string_view, std::int32_t> index;
  for (std::size_t row = 0; row < cells.size(); ++row) {
    auto const& cell = cells[row];
    if (!cell) {
      null_positions_.push_back(static_cast<RowIndex>(row));
      if (null_mode == NullMode::kNullDistinct) {
        codes_.push_back(kNoCode);
        continue;
      }
      if (!null_code_) {
        null_code_ = static_cast<std::int32_t>(dictionary_.size());
        dictionary_.emplace_back(std::nullopt);
      }
      codes_.push_back(*null_code_);
      continue;
    }
    auto [it, inserted] = index.try_emplace(*cell, static_cast<std::int32_t>(dictionary_.size()));
    if (inserted) dictionary_.emplace_back(*cell);
    codes_.push_back(it->second);
  }
}

bool Column::is_null(std::size_t row) const {
  auto code = codes_.at(row);
  return code == kNoCode || (null_code_ && code == *null_code_);
}

std::optional<std::string_view> Column::value(std::size_t row) const {
  auto code = codes_.at(row);
  if (code == kNoCode) return std::nullopt;
  auto const& entry = dictionary_[static_cast<std::size_t>(code)];
  if (!entry) return std::nullopt;
  return std::string_view(*entry);
}

std::size_t Column::distinct_count() const noexcept { return dictionary_.size() - (null_code_ ? 1 : 0); }

Table::Table(std::string name, std::vector<std::string> column_names, std::vector<std::vector<Cell>> const& columns,
             TableOptions options)
    : name_(std::move(name)), options_(options) {
  if (column_names.empty()) {
    for (std::size_t i = 0; i < columns.size(); ++i) column_names.push_back("col_" + std::to_string(i));
  }
  if (column_names.size() != columns.size()) {
    throw Error(ErrorCode::kSourceMismatch, "column name count differs from column count");
  }
  std::unordered_set<std::string_view> seen;
  for (auto const& n : column_names) {
    if (!seen.insert(n).second) throw MalformedCsvError(0, "duplicate column name '" + n + "'");
  }
  row_count_ = columns.empty() ? 0 : columns.front().size();
  columns_.reserve(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].size() != row_count_) {
      throw Error(ErrorCode::kSourceMismatch, "column '" + column_names[c] + "' has a different row count");
    }
    columns_.emplace_back(std::move(column_names[c]), columns[c], options_.null_mode);
  }
}

Column const& Table::column(std::size_t index) const {
  if (index >= columns_.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "column index " + std::to_string(index) + " out of range (" + std::to_string(columns_.size()) +
                    " columns)");
  }
  return columns_[index];
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name() == name) return i;
  }
  return std::nullopt;
}

std::optional<std::string_view> Table::cell(std::size_t row, std::size_t column) const {
  if (row >= row_count_) {
    throw Error(ErrorCode::kIndexOutOfRange, "row index " + std::to_string(row) + " out of range");
  }
  return this->column(column).value(row);
}

std::vector<std::vector<Cell>> Table::cells() const {
  std::vector<std::vector<Cell>> out(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    out[c].reserve(row_count_);
    for (std::size_t r = 0; r < row_count_; ++r) {
      auto v = columns_[c].value(r);
      out[c].push_back(v ? Cell(std::string(*v)) : Cell());
    }
  }
  return out;
}

std::vector<std::string> Table::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (auto const& c : columns_) names.push_back(c.name());
  return names;
}

}  // namespace profiler
