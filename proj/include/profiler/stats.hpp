#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "profiler/execution.hpp"
#include "profiler/table.hpp"

namespace profiler {

struct ColumnStats {
  std::string name;
  ColumnType type = ColumnType::kEmpty;
  std::size_t row_count = 0;
  std::size_t null_count = 0;
  std::size_t distinct_count = 0;
  // Raw text of the extreme values; numeric order for numeric columns,
  // byte-wise lexicographic order for text.
  std::optional<std::string> min;
  std::optional<std::string> max;
  // Numeric columns only. std_dev is the population standard deviation.
  std::optional<double> mean;
  std::optional<double> std_dev;
};

std::vector<ColumnStats> profile_table(Table const& table, ExecutionControl* control = nullptr,
                                       unsigned thread_count = 1);

}  // namespace profiler
