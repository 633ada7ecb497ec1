#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "profiler/execution.hpp"
#include "profiler/table.hpp"

namespace profiler {

/// A column of one of the tables passed to the IND functions.
struct ColumnRef {
  std::size_t table = 0;
  std::size_t column = 0;

  friend auto operator<=>(ColumnRef const&, ColumnRef const&) = default;
};

/// Unary inclusion dependency: every non-null value of `dependent` occurs in
/// `referenced`. Values compare as raw text.
struct Ind {
  ColumnRef dependent;
  ColumnRef referenced;

  friend auto operator<=>(Ind const&, Ind const&) = default;
};

struct IndOptions {
  /// Attributes with more distinct values than this are sorted in memory and
  /// then streamed from a temporary file during the merge.
  std::size_t spill_threshold = 1'000'000;
  std::filesystem::path spill_directory = std::filesystem::temp_directory_path();
  unsigned thread_count = 1;
};

/// All holding unary INDs between distinct attributes of `tables`, sorted.
/// Each attribute's distinct values are sorted, then all attributes are
/// merged in one pass; the candidate referenced set of an attribute shrinks to
/// the attributes that share each of its values.
std::vector<Ind> discover_unary_inds(std::span<Table const* const> tables, IndOptions const& options = {},
                                     ExecutionControl* control = nullptr);

struct IndValidation {
  bool holds = true;
  /// Sorted sample of dependent values absent from the referenced column.
  std::vector<std::string> missing_values;
};

IndValidation validate_ind(std::span<Table const* const> tables, Ind const& ind, std::size_t max_missing = 10);

/// Resolves names. Throws Error{kUnknownTable} / Error{kUnknownColumn}.
ColumnRef resolve_column(std::span<Table const* const> tables, std::string_view table_name,
                         std::string_view column_name);

/// "S.X ⊆ T.Y"
std::string to_string(Ind const& ind, std::span<Table const* const> tables);

/// Distinct non-null raw values of a column, ascending.
std::vector<std::string> sorted_distinct_values(Column const& column);

}  // namespace profiler
