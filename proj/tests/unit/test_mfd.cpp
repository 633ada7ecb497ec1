#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "profiler/csv.hpp"
#include "profiler/errors.hpp"
#include "profiler/fd.hpp"
#include "profiler/mfd.hpp"

using namespace profiler;
namespace oracle = profiler::testing;

namespace {

Table city_table() {
  return parse_csv_text(
      "city,temp,name\n"
      "Moscow,10,anna\n"
      "Moscow,12,anne\n"
      "Moscow,100,bob\n"
      "Paris,20,carl\n"
      "Paris,21,carla\n",
      {});
}

}  // namespace

TEST_CASE("outlier in a numeric cluster") {
  auto t = city_table();
  auto report = validate_mfd(t, {{0}, {1}, MfdMetric::kAbsoluteDifference, 5.0});
  CHECK_FALSE(report.holds);
  REQUIRE(report.clusters.size() == 1);
  auto const& cluster = report.clusters.front();
  CHECK(*cluster.lhs_value.front() == "Moscow");
  REQUIRE(cluster.points.size() == 3);
  CHECK_FALSE(cluster.points[0].is_outlier);
  CHECK_FALSE(cluster.points[1].is_outlier);
  CHECK(cluster.points[2].is_outlier);
  CHECK(cluster.points[2].min_distance == 88.0);
  CHECK(cluster.points[2].max_distance == 90.0);
  CHECK(cluster.points[0].min_distance == 2.0);
  CHECK(cluster.diameter == 90.0);
  CHECK(cluster.outlier_count() == 1);
}

TEST_CASE("large delta and exact FD both hold") {
  auto t = city_table();
  CHECK(validate_mfd(t, {{0}, {1}, MfdMetric::kAbsoluteDifference, 90.0}).holds);
  auto exact = oracle::make_int_table({{1, 1, 2}, {7, 7, 9}});
  CHECK(validate_mfd(exact, {{0}, {1}, MfdMetric::kAbsoluteDifference, 0.0}).holds);
}

TEST_CASE("euclidean and levenshtein metrics") {
  auto t = city_table();
  auto eu = validate_mfd(t, {{0}, {1, 1}, MfdMetric::kEuclidean, 3.0});
  CHECK_FALSE(eu.holds);
  CHECK(eu.clusters.front().points[0].min_distance == doctest::Approx(2.0 * std::sqrt(2.0)));

  auto lev = validate_mfd(t, {{0}, {2}, MfdMetric::kLevenshtein, 1.0});
  CHECK_FALSE(lev.holds);  // bob is far from anna/anne
  REQUIRE(lev.clusters.size() == 1);
  CHECK(lev.clusters.front().points[2].is_outlier);
  CHECK_FALSE(lev.clusters.front().points[0].is_outlier);
  CHECK(validate_mfd(t, {{0}, {2}, MfdMetric::kLevenshtein, 4.0}).holds);
}

TEST_CASE("metric and column type mismatches") {
  auto t = city_table();
  auto code = [&](MfdQuery q) {
    try {
      validate_mfd(t, q);
    } catch (Error const& e) {
      return e.code();
    }
    return ErrorCode::kValidationError;
  };
  CHECK(code({{0}, {2}, MfdMetric::kAbsoluteDifference, 1.0}) == ErrorCode::kTypeMismatch);
  CHECK(code({{0}, {1, 1}, MfdMetric::kAbsoluteDifference, 1.0}) == ErrorCode::kTypeMismatch);
  CHECK(code({{0}, {1, 2}, MfdMetric::kEuclidean, 1.0}) == ErrorCode::kTypeMismatch);
  CHECK(code({{0}, {9}, MfdMetric::kEuclidean, 1.0}) == ErrorCode::kIndexOutOfRange);
  CHECK_THROWS_AS(parse_mfd_metric("manhattan"), Error);
}

TEST_CASE("distance symmetry and identity") {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> value(-100, 100);
  std::vector<std::string> words{"", "a", "kitten", "sitting", "flaw", "lawn", "déjà", "deja"};
  for (int i = 0; i < 100; ++i) {
    double a = value(rng), b = value(rng);
    CHECK(absolute_difference(a, b) == absolute_difference(b, a));
    CHECK(absolute_difference(a, a) == 0.0);
    std::vector<double> p{a, b}, q{b, value(rng)};
    CHECK(euclidean_distance(p, q) == euclidean_distance(q, p));
    CHECK(euclidean_distance(p, p) == 0.0);
  }
  for (auto const& x : words) {
    CHECK(levenshtein_distance(x, x) == 0);
    for (auto const& y : words) CHECK(levenshtein_distance(x, y) == levenshtein_distance(y, x));
  }
  CHECK(levenshtein_distance("kitten", "sitting") == 3);
  CHECK(levenshtein_distance("déjà", "deja") == 2);
}

TEST_CASE("random tables: delta=0 agrees with FD validation, monotone in delta, outlier soundness") {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = oracle::make_int_table(oracle::random_values(rng, 3, 40, 2, 6));
    std::vector<std::size_t> lhs{0};
    CHECK(validate_mfd(t, {lhs, {2}, MfdMetric::kAbsoluteDifference, 0.0}).holds ==
          validate_fd(t, lhs, 2, 0.0).holds);
    bool previous = false;
    for (double delta = 0.0; delta <= 6.0; delta += 0.75) {
      auto report = validate_mfd(t, {lhs, {2}, MfdMetric::kAbsoluteDifference, delta});
      CHECK(report.holds == oracle::mfd_holds_pairwise(t, lhs, 2, delta));
      if (previous) CHECK(report.holds);
      previous = report.holds;
      for (auto const& cluster : report.clusters) {
        std::vector<double> kept;
        for (auto const& p : cluster.points) {
          if (!p.is_outlier) kept.push_back(std::get<std::vector<double>>(p.value).front());
        }
        for (std::size_t i = 0; i < kept.size(); ++i) {
          bool has_neighbor = false;
          for (std::size_t j = 0; j < kept.size(); ++j) {
            if (i != j && std::fabs(kept[i] - kept[j]) <= delta) has_neighbor = true;
          }
          CHECK((kept.size() < 2 || has_neighbor));
        }
      }
    }
  }
}

TEST_CASE("null rhs rows are skipped") {
  auto t = parse_csv_text("k,v\n1,5\n1,\n1,5\n", {});
  CHECK(validate_mfd(t, {{0}, {1}, MfdMetric::kAbsoluteDifference, 0.0}).holds);
}

TEST_CASE("cluster sorting") {
  auto t = parse_csv_text("k,v\na,1\na,50\nb,1\nb,2\nb,100\nb,101\nc,0\nc,3\n", {});
  auto report = validate_mfd(t, {{0}, {1}, MfdMetric::kAbsoluteDifference, 2.0});
  REQUIRE(report.clusters.size() == 3);
  auto clusters = report.clusters;
  sort_clusters(clusters, MfdSortKey::kDistance);
  CHECK(clusters[0].diameter == 100.0);
  CHECK(clusters[0].points.front().max_distance == 100.0);
  sort_clusters(clusters, MfdSortKey::kOutliers);
  CHECK(clusters[0].outlier_count() == 2);  // a: both points isolated
  CHECK(clusters[0].points.front().is_outlier);
  sort_clusters(clusters, MfdSortKey::kIndex);
  CHECK(clusters[0].points.front().row == 0);
  CHECK(clusters[1].points.front().row == 2);
  CHECK_THROWS_AS(parse_mfd_sort_key("size"), Error);
}
