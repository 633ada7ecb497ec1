#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "profiler/engine/executors.hpp"

namespace profiler::engine {

struct ResultQuery {
  /// Field of the item data to order by; "-" prefix for descending, empty
  /// keeps the executor's order. Items lacking the field sort last.
  std::string sort;
  /// ECMAScript regex searched in each item's text; empty matches all.
  std::string filter;
  std::size_t page = 0;  // 0-based
  std::size_t page_size = 50;
};

struct ResultPage {
  std::size_t total_count = 0;  // after filtering
  std::size_t page = 0;
  std::size_t page_size = 0;
  std::string sort;
  std::string filter;
  std::vector<ResultItem> items;
  nlohmann::json summary;
};

nlohmann::json to_json(ResultPage const& page);

/// Sorted, filtered indexes into result.items. Sorting is stable. Throws
/// BadRegex for an invalid filter and ValidationError for a sort key no item
/// carries.
std::vector<std::size_t> select_items(TaskResult const& result, std::string const& sort, std::string const& filter);

ResultPage make_page(TaskResult const& result, ResultQuery const& query);

}  // namespace profiler::engine
