#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "profiler/execution.hpp"
#include "profiler/table.hpp"

namespace profiler {

enum class MfdMetric {
  kAbsoluteDifference,  ///< one numeric rhs column
  kEuclidean,           ///< one or more numeric rhs columns
  kLevenshtein,         ///< one text column
};

/// Throws Error{kValidationError} on an unknown name.
MfdMetric parse_mfd_metric(std::string_view name);
std::string_view mfd_metric_name(MfdMetric metric) noexcept;

double absolute_difference(double a, double b) noexcept;
double euclidean_distance(std::vector<double> const& a, std::vector<double> const& b);
/// Edit distance over UTF-8 code points.
std::size_t levenshtein_distance(std::string_view a, std::string_view b);

struct MfdQuery {
  std::vector<std::size_t> lhs;
  std::vector<std::size_t> rhs;
  MfdMetric metric = MfdMetric::kAbsoluteDifference;
  double delta = 0.0;
};

/// An rhs value: numeric coordinates or text.
using MfdValue = std::variant<std::vector<double>, std::string>;

std::string to_string(MfdValue const& value);

struct MfdPoint {
  RowIndex row = 0;
  MfdValue value;
  /// Minimum distance to every other point of the cluster exceeds delta.
  bool is_outlier = false;
  /// Distance to the nearest other point.
  double min_distance = 0.0;
  /// Distance to the farthest other point.
  double max_distance = 0.0;
};

struct MfdCluster {
  std::vector<Cell> lhs_value;
  std::vector<MfdPoint> points;  // ascending row index
  double diameter = 0.0;

  std::size_t outlier_count() const noexcept;
};

struct MfdReport {
  bool holds = true;
  /// Violating clusters only, in order of first row.
  std::vector<MfdCluster> clusters;
};

/// Checks that inside every lhs class all pairwise rhs distances are <= delta.
/// Rows with a null in any rhs column take no part in the check.
///
/// Throws Error{kTypeMismatch} when the rhs columns do not suit the metric,
/// Error{kIndexOutOfRange}, Error{kValidationError} for a negative delta.
MfdReport validate_mfd(Table const& table, MfdQuery const& query, ExecutionControl* control = nullptr);

enum class MfdSortKey {
  kDistance,  ///< clusters by diameter, points by max distance; largest first
  kIndex,     ///< clusters and points by row index
  kOutliers,  ///< clusters by outlier count, outliers first inside a cluster
};

/// Throws Error{kValidationError} on an unknown name.
MfdSortKey parse_mfd_sort_key(std::string_view name);

void sort_clusters(std::vector<MfdCluster>& clusters, MfdSortKey key);

}  // namespace profiler
