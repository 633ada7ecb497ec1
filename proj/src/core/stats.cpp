#include "profiler/stats.hpp"

#include <cmath>

#include "profiler/parallel.hpp"

namespace profiler {

namespace {

ColumnStats profile_column(Column const& column, std::size_t row_count) {
  ColumnStats stats;
  stats.name = column.name();
  stats.type = column.type();
  stats.row_count = row_count;
  stats.null_count = column.null_positions().size();

  // Statistics over the dictionary of used codes, weighted by frequency.
  std::vector<std::size_t> frequency(column.dictionary().size(), 0);
  for (auto code : column.codes()) {
    if (code != Column::kNoCode) ++frequency[static_cast<std::size_t>(code)];
  }
  auto const dictionary = column.dictionary();
  std::optional<std::size_t> lowest, highest;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t code = 0; code < dictionary.size(); ++code) {
    if (!dictionary[code] || frequency[code] == 0) continue;
    ++stats.distinct_count;
    auto const& raw = *dictionary[code];
    if (column.is_numeric()) {
      double v = *parse_number(raw);
      sum += v * static_cast<double>(frequency[code]);
      count += frequency[code];
      if (!lowest || v < *parse_number(*dictionary[*lowest])) lowest = code;
      if (!highest || v > *parse_number(*dictionary[*highest])) highest = code;
    } else {
      if (!lowest || raw < *dictionary[*lowest]) lowest = code;
      if (!highest || raw > *dictionary[*highest]) highest = code;
    }
  }
  if (lowest) stats.min = *dictionary[*lowest];
  if (highest) stats.max = *dictionary[*highest];

  if (column.is_numeric() && count > 0) {
    double mean = sum / static_cast<double>(count);
    double squares = 0.0;
    for (std::size_t code = 0; code < dictionary.size(); ++code) {
      if (!dictionary[code] || frequency[code] == 0) continue;
      double d = *parse_number(*dictionary[code]) - mean;
      squares += d * d * static_cast<double>(frequency[code]);
    }
    stats.mean = mean;
    stats.std_dev = std::sqrt(squares / static_cast<double>(count));
  }
  return stats;
}

}  // namespace

std::vector<ColumnStats> profile_table(Table const& table, ExecutionControl* control, unsigned thread_count) {
  std::vector<ColumnStats> out(table.column_count());
  parallel_for(table.column_count(), thread_count, [&](std::size_t c) {
    checkpoint(control);
    out[c] = profile_column(table.column(c), table.row_count());
  });
  return out;
}

}  // namespace profiler
