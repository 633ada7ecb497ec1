#include "profiler/mfd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "profiler/errors.hpp"
#include "profiler/fd.hpp"
#include "profiler/pli.hpp"

namespace profiler {

MfdMetric parse_mfd_metric(std::string_view name) {
  if (name == "absolute-difference" || name == "abs") return MfdMetric::kAbsoluteDifference;
  if (name == "euclidean") return MfdMetric::kEuclidean;
  if (name == "levenshtein") return MfdMetric::kLevenshtein;
  throw Error(ErrorCode::kValidationError,
              "unknown metric '" + std::string(name) + "' (expected absolute-difference, euclidean, levenshtein)");
}

std::string_view mfd_metric_name(MfdMetric metric) noexcept {
  switch (metric) {
    case MfdMetric::kAbsoluteDifference: return "absolute-difference";
    case MfdMetric::kEuclidean: return "euclidean";
    case MfdMetric::kLevenshtein: return "levenshtein";
  }
  return "absolute-difference";
}

double absolute_difference(double a, double b) noexcept { return std::fabs(a - b); }

double euclidean_distance(std::vector<double> const& a, std::vector<double> const& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kTypeMismatch, "points of different dimension");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

namespace {

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    auto byte = static_cast<unsigned char>(text[i]);
    std::size_t length = byte < 0x80 ? 1 : (byte >> 5) == 0x6 ? 2 : (byte >> 4) == 0xE ? 3 : (byte >> 3) == 0x1E ? 4 : 1;
    if (i + length > text.size()) length = 1;
    char32_t cp = length == 1 ? byte : byte & (0xFF >> (length + 1));
    for (std::size_t k = 1; k < length; ++k) cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
    out.push_back(cp);
    i += length;
  }
  return out;
}

}  // namespace

std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
  auto x = decode_utf8(a);
  auto y = decode_utf8(b);
  if (x.size() < y.size()) std::swap(x, y);
  std::vector<std::size_t> row(y.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= x.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      std::size_t above = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diagonal + (x[i - 1] == y[j - 1] ? 0 : 1)});
      diagonal = above;
    }
  }
  return row[y.size()];
}

std::string to_string(MfdValue const& value) {
  if (auto const* text = std::get_if<std::string>(&value)) return *text;
  auto const& coords = std::get<std::vector<double>>(value);
  if (coords.size() == 1) return format_real(coords.front());
  std::string out = "(";
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (i) out += ", ";
    out += format_real(coords[i]);
  }
  return out + ")";
}

std::size_t MfdCluster::outlier_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](MfdPoint const& p) { return p.is_outlier; }));
}

namespace {

void check_query(Table const& table, MfdQuery const& query) {
  for (auto c : query.lhs) table.column(c);
  for (auto c : query.rhs) table.column(c);
  if (!(query.delta >= 0.0)) throw Error(ErrorCode::kValidationError, "delta must be non-negative");
  if (query.rhs.empty()) throw Error(ErrorCode::kValidationError, "metric dependency needs an rhs column");

  auto numeric = [&](std::size_t c) {
    auto const& column = table.column(c);
    return column.is_numeric() || column.type() == ColumnType::kEmpty;
  };
  switch (query.metric) {
    case MfdMetric::kAbsoluteDifference:
      if (query.rhs.size() != 1) {
        throw Error(ErrorCode::kTypeMismatch, "absolute-difference needs exactly one rhs column");
      }
      [[fallthrough]];
    case MfdMetric::kEuclidean:
      for (auto c : query.rhs) {
        if (!numeric(c)) {
          throw Error(ErrorCode::kTypeMismatch, "column '" + table.column(c).name() + "' is not numeric");
        }
      }
      break;
    case MfdMetric::kLevenshtein:
      if (query.rhs.size() != 1) throw Error(ErrorCode::kTypeMismatch, "levenshtein needs exactly one rhs column");
      break;
  }
}

/// Fills min/max distances from all pairwise distances.
void measure_pairwise(std::vector<MfdPoint>& points, MfdMetric metric, ExecutionControl const* control) {
  auto distance = [&](MfdPoint const& a, MfdPoint const& b) -> double {
    if (metric == MfdMetric::kLevenshtein) {
      return static_cast<double>(levenshtein_distance(std::get<std::string>(a.value), std::get<std::string>(b.value)));
    }
    return euclidean_distance(std::get<std::vector<double>>(a.value), std::get<std::vector<double>>(b.value));
  };
  for (auto& p : points) {
    p.min_distance = std::numeric_limits<double>::infinity();
    p.max_distance = 0.0;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    checkpoint(control);
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      double d = distance(points[i], points[j]);
      for (auto* p : {&points[i], &points[j]}) {
        p->min_distance = std::min(p->min_distance, d);
        p->max_distance = std::max(p->max_distance, d);
      }
    }
  }
}

/// One-dimensional case via sorting: nearest neighbour is adjacent in order.
void measure_sorted(std::vector<MfdPoint>& points) {
  auto scalar = [](MfdPoint const& p) { return std::get<std::vector<double>>(p.value).front(); };
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scalar(points[a]) < scalar(points[b]); });
  double lowest = scalar(points[order.front()]);
  double highest = scalar(points[order.back()]);
  for (std::size_t k = 0; k < order.size(); ++k) {
    auto& p = points[order[k]];
    double v = scalar(p);
    double nearest = std::numeric_limits<double>::infinity();
    if (k > 0) nearest = std::min(nearest, absolute_difference(v, scalar(points[order[k - 1]])));
    if (k + 1 < order.size()) nearest = std::min(nearest, absolute_difference(v, scalar(points[order[k + 1]])));
    p.min_distance = nearest;
    p.max_distance = std::max(absolute_difference(v, lowest), absolute_difference(v, highest));
  }
}

}  // namespace

MfdReport validate_mfd(Table const& table, MfdQuery const& query, ExecutionControl* control) {
  check_query(table, query);
  auto partition = build_pli(table, query.lhs);
  MfdReport report;

  for (std::size_t i = 0; i < partition.cluster_count(); ++i) {
    checkpoint(control);
    auto rows = partition.cluster(i);
    std::vector<MfdPoint> points;
    for (auto row : rows) {
      MfdPoint point;
      point.row = row;
      if (query.metric == MfdMetric::kLevenshtein) {
        auto v = table.column(query.rhs.front()).value(row);
        if (!v) continue;
        point.value = std::string(*v);
      } else {
        std::vector<double> coords;
        bool complete = true;
        for (auto c : query.rhs) {
          auto v = table.column(c).value(row);
          auto number = v ? parse_number(*v) : std::nullopt;
          if (!number) {
            complete = false;
            break;
          }
          coords.push_back(*number);
        }
        if (!complete) continue;
        point.value = std::move(coords);
      }
      points.push_back(std::move(point));
    }
    if (points.size() < 2) continue;

    if (query.metric == MfdMetric::kAbsoluteDifference) {
      measure_sorted(points);
    } else {
      measure_pairwise(points, query.metric, control);
    }
    double diameter = 0.0;
    for (auto& p : points) {
      p.is_outlier = p.min_distance > query.delta;
      diameter = std::max(diameter, p.max_distance);
    }
    if (diameter <= query.delta) continue;

    MfdCluster cluster;
    for (auto c : query.lhs) {
      auto v = table.column(c).value(rows.front());
      cluster.lhs_value.push_back(v ? Cell(std::string(*v)) : Cell());
    }
    cluster.points = std::move(points);
    cluster.diameter = diameter;
    report.clusters.push_back(std::move(cluster));
  }
  report.holds = report.clusters.empty();
  std::stable_sort(report.clusters.begin(), report.clusters.end(), [](MfdCluster const& a, MfdCluster const& b) {
    return a.points.front().row < b.points.front().row;
  });
  return report;
}

MfdSortKey parse_mfd_sort_key(std::string_view name) {
  if (name == "distance") return MfdSortKey::kDistance;
  if (name == "index") return MfdSortKey::kIndex;
  if (name == "outliers") return MfdSortKey::kOutliers;
  throw Error(ErrorCode::kValidationError,
              "unknown sort key '" + std::string(name) + "' (expected distance, index, outliers)");
}

void sort_clusters(std::vector<MfdCluster>& clusters, MfdSortKey key) {
  auto first_row = [](MfdCluster const& c) { return c.points.front().row; };
  for (auto& cluster : clusters) {
    auto& points = cluster.points;
    switch (key) {
      case MfdSortKey::kDistance:
        std::stable_sort(points.begin(), points.end(),
                         [](MfdPoint const& a, MfdPoint const& b) { return a.max_distance > b.max_distance; });
        break;
      case MfdSortKey::kIndex:
        std::stable_sort(points.begin(), points.end(),
                         [](MfdPoint const& a, MfdPoint const& b) { return a.row < b.row; });
        break;
      case MfdSortKey::kOutliers:
        std::stable_sort(points.begin(), points.end(),
                         [](MfdPoint const& a, MfdPoint const& b) { return a.is_outlier && !b.is_outlier; });
        break;
    }
  }
  // Clusters are compared by row of their lowest point, independent of point order.
  auto lowest_row = [&](MfdCluster const& c) {
    RowIndex low = first_row(c);
    for (auto const& p : c.points) low = std::min(low, p.row);
    return low;
  };
  std::stable_sort(clusters.begin(), clusters.end(), [&](MfdCluster const& a, MfdCluster const& b) {
    switch (key) {
      case MfdSortKey::kDistance:
        if (a.diameter != b.diameter) return a.diameter > b.diameter;
        break;
      case MfdSortKey::kOutliers:
        if (a.outlier_count() != b.outlier_count()) return a.outlier_count() > b.outlier_count();
        break;
      case MfdSortKey::kIndex:
        break;
    }
    return lowest_row(a) < lowest_row(b);
  });
}

}  // namespace profiler
