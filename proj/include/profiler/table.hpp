#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace profiler {

/// A raw CSV cell. std::nullopt is a missing value (empty unquoted field).
using Cell = std::optional<std::string>;
using RowIndex = std::uint32_t;

/// How missing values compare when building equality classes.
enum class NullMode {
  kNullEqual,     ///< all nulls of a column form one class (default)
  kNullDistinct,  ///< every null is unique and never joins a cluster
};

enum class ColumnType { kInteger, kReal, kText, kEmpty };

std::string_view column_type_name(ColumnType type) noexcept;

/// Integer if every non-null cell is an integer, else real if every one is a
/// decimal number, else text. All-null (or zero-length) input is kEmpty.
ColumnType infer_type(std::span<Cell const> cells);

bool parses_as_integer(std::string_view text) noexcept;
std::optional<double> parse_number(std::string_view text) noexcept;

/// Dictionary-encoded column. Codes are dense, assigned in first-occurrence
/// order. In null-equal mode the null class receives an ordinary code whose
/// dictionary entry is std::nullopt; in null-distinct mode null cells carry
/// kNoCode.
class Column {
 public:
  static constexpr std::int32_t kNoCode = -1;

  Column(std::string name, std::span<Cell const> cells, NullMode null_mode);

  std::string const& name() const noexcept { return name_; }
  ColumnType type() const noexcept { return type_; }
  bool is_numeric() const noexcept { return type_ == ColumnType::kInteger || type_ == ColumnType::kReal; }

  std::size_t size() const noexcept { return codes_.size(); }
  std::span<std::int32_t const> codes() const noexcept { return codes_; }
  std::int32_t code(std::size_t row) const { return codes_[row]; }

  /// code -> raw value; the null class (null-equal mode only) maps to nullopt.
  std::span<Cell const> dictionary() const noexcept { return dictionary_; }
  std::optional<std::int32_t> null_code() const noexcept { return null_code_; }

  std::span<RowIndex const> null_positions() const noexcept { return null_positions_; }
  bool is_null(std::size_t row) const;
  std::optional<std::string_view> value(std::size_t row) const;

  /// Number of distinct non-null values.
  std::size_t distinct_count() const noexcept;

 private:
  std::string name_;
  ColumnType type_ = ColumnType::kEmpty;
  std::vector<std::int32_t> codes_;
  std::vector<Cell> dictionary_;
  std::vector<RowIndex> null_positions_;
  std::optional<std::int32_t> null_code_;
};

struct TableOptions {
  bool has_header = true;
  char separator = ',';
  NullMode null_mode = NullMode::kNullEqual;
};

/// Immutable columnar dataset.
class Table {
 public:
  /// `columns[c][r]` is the cell at row r of column c. Column names must be
  /// unique; an empty `column_names` auto-generates col_0..col_{n-1}.
  Table(std::string name, std::vector<std::string> column_names, std::vector<std::vector<Cell>> const& columns,
        TableOptions options = {});

  std::string const& name() const noexcept { return name_; }
  std::size_t row_count() const noexcept { return row_count_; }
  std::size_t column_count() const noexcept { return columns_.size(); }
  bool has_header() const noexcept { return options_.has_header; }
  char separator() const noexcept { return options_.separator; }
  NullMode null_mode() const noexcept { return options_.null_mode; }
  TableOptions const& options() const noexcept { return options_; }

  std::vector<Column> const& columns() const noexcept { return columns_; }
  /// Throws Error{kIndexOutOfRange}.
  Column const& column(std::size_t index) const;
  std::optional<std::size_t> find_column(std::string_view name) const;

  std::optional<std::string_view> cell(std::size_t row, std::size_t column) const;

  /// Materialized cells, column-major. Used to derive edited revisions.
  std::vector<std::vector<Cell>> cells() const;
  std::vector<std::string> column_names() const;

 private:
  std::string name_;
  TableOptions options_;
  std::size_t row_count_ = 0;
  std::vector<Column> columns_;
};

}  // namespace profiler
