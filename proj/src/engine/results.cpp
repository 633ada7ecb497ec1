#include "profiler/engine/results.hpp"

#include <algorithm>
#include <numeric>
#include <regex>

#include "profiler/errors.hpp"

namespace profiler::engine {

using nlohmann::json;

std::vector<std::size_t> select_items(TaskResult const& result, std::string const& sort, std::string const& filter) {
  std::vector<std::size_t> order;
  order.reserve(result.items.size());
  if (filter.empty()) {
    order.resize(result.items.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  } else {
    std::regex pattern;
    try {
      pattern = std::regex(filter, std::regex::ECMAScript);
    } catch (std::regex_error const& e) {
      throw Error(ErrorCode::kBadRegex, "bad filter regex '" + filter + "': " + e.what());
    }
    for (std::size_t i = 0; i < result.items.size(); ++i) {
      if (std::regex_search(result.items[i].text, pattern)) order.push_back(i);
    }
  }
  if (sort.empty()) return order;

  bool descending = sort.front() == '-';
  std::string key = descending ? sort.substr(1) : sort;
  if (!result.items.empty() && std::none_of(result.items.begin(), result.items.end(), [&](ResultItem const& item) {
        return item.data.is_object() && item.data.contains(key);
      })) {
    throw Error(ErrorCode::kValidationError, "unknown sort key '" + key + "'");
  }
  auto field = [&](std::size_t i) -> json const* {
    auto const& data = result.items[i].data;
    auto it = data.find(key);
    return it == data.end() || it->is_null() ? nullptr : &*it;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto const* x = field(a);
    auto const* y = field(b);
    if (x == nullptr || y == nullptr) return x != nullptr && y == nullptr;
    return descending ? *y < *x : *x < *y;
  });
  return order;
}

ResultPage make_page(TaskResult const& result, ResultQuery const& query) {
  if (query.page_size == 0) throw Error(ErrorCode::kValidationError, "page_size must be positive");
  auto order = select_items(result, query.sort, query.filter);
  ResultPage page;
  page.total_count = order.size();
  page.page = query.page;
  page.page_size = query.page_size;
  page.sort = query.sort;
  page.filter = query.filter;
  page.summary = result.summary;
  if (query.page < (order.size() + query.page_size - 1) / query.page_size) {
    auto begin = query.page * query.page_size;
    auto end = std::min(order.size(), begin + query.page_size);
    for (auto i = begin; i < end; ++i) page.items.push_back(result.items[order[i]]);
  }
  return page;
}

json to_json(ResultPage const& page) {
  json items = json::array();
  for (auto const& item : page.items) items.push_back({{"data", item.data}, {"text", item.text}});
  return {
      {"total_count", page.total_count},
      {"page", page.page},
      {"page_size", page.page_size},
      {"sort", page.sort},
      {"filter", page.filter},
      {"summary", page.summary},
      {"items", std::move(items)},
  };
}

}  // namespace profiler::engine
