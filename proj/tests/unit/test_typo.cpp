#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "profiler/errors.hpp"
#include "profiler/typo.hpp"

using namespace profiler;
namespace oracle = profiler::testing;

TEST_CASE("T1 surfaces A -> C with one cluster") {
  auto t1 = oracle::make_t1();
  TypoPipelineConfig config;
  config.error_threshold = 0.3;
  config.max_lhs = 2;
  auto result = find_typo_candidates(t1, config);
  auto it = std::find_if(result.begin(), result.end(), [](TypoCandidates const& c) {
    return c.fd.lhs == std::vector<std::size_t>{0} && c.fd.rhs == 2;
  });
  REQUIRE(it != result.end());
  CHECK(it->fd.error == 0.25);
  REQUIRE(it->clusters.size() == 1);
  auto const& cluster = it->clusters.front();
  CHECK(cluster.cluster.rows.size() == 2);
  CHECK(cluster.suspicion_score == 0.5);
  CHECK(cluster.suspect_rows == std::vector<RowIndex>{1});
  for (auto const& c : result) {
    CHECK(c.fd.error > 0.0);
    CHECK(c.fd.error <= 0.3);
  }
  for (std::size_t i = 1; i < result.size(); ++i) CHECK(result[i - 1].fd.error <= result[i].fd.error);
}

TEST_CASE("exact-only table and tiny thresholds give nothing") {
  auto exact = oracle::make_int_table({{1, 1, 2, 2}, {3, 3, 4, 4}});
  TypoPipelineConfig config;
  config.error_threshold = 0.5;
  CHECK(find_typo_candidates(exact, config).empty());

  auto t1 = oracle::make_t1();
  config.error_threshold = 0.2;
  CHECK(find_typo_candidates(t1, config).empty());
}

TEST_CASE("config validation") {
  auto t1 = oracle::make_t1();
  TypoPipelineConfig config;
  config.error_threshold = 0.0;
  CHECK_THROWS_AS(find_typo_candidates(t1, config), Error);
  config = {};
  config.min_cluster_size = 1;
  CHECK_THROWS_AS(find_typo_candidates(t1, config), Error);
}

TEST_CASE("cluster filtering and truncation") {
  // A -> B with three violating groups of sizes 4, 3, 2.
  auto t = oracle::make_int_table({{0, 0, 0, 0, 1, 1, 1, 2, 2, 3, 3, 3},
                                   {5, 5, 5, 6, 7, 7, 8, 9, 1, 4, 4, 4}});
  TypoPipelineConfig config;
  config.error_threshold = 0.4;
  config.max_lhs = 1;
  auto all = find_typo_candidates(t, config);
  auto pick = [](std::vector<TypoCandidates> const& v) {
    return *std::find_if(v.begin(), v.end(), [](TypoCandidates const& c) { return c.fd.rhs == 1 && c.fd.lhs.size() == 1; });
  };
  CHECK(pick(all).clusters.size() == 3);
  config.min_cluster_size = 3;
  CHECK(pick(find_typo_candidates(t, config)).clusters.size() == 2);
  config.max_clusters_shown = 1;
  auto one = pick(find_typo_candidates(t, config));
  REQUIRE(one.clusters.size() == 1);
  CHECK(one.clusters[0].cluster.rows.size() == 4);
  CHECK(one.clusters[0].suspicion_score == 0.25);
}

TEST_CASE("apply_fixes produces a new revision") {
  auto t1 = oracle::make_t1();
  std::vector<FixDecision> fix{{1, 2, false, Cell("x")}};
  auto fixed = apply_fixes(t1, fix);
  std::vector<std::size_t> lhs{0};
  CHECK(fd_error(fixed, lhs, 2) == 0.0);
  CHECK(fd_error(t1, lhs, 2) == 0.25);
  CHECK(fixed.row_count() == t1.row_count());
  CHECK(fixed.column_count() == t1.column_count());

  auto same = apply_fixes(t1, {});
  CHECK(same.cells() == t1.cells());

  std::vector<FixDecision> keep{{1, 2, true, Cell("zzz")}};
  CHECK(apply_fixes(t1, keep).cells() == t1.cells());

  std::vector<FixDecision> bad{{4, 0, false, Cell("x")}};
  CHECK_THROWS_AS(apply_fixes(t1, bad), Error);
}

TEST_CASE("injected corruptions are recovered and majority fixes converge") {
  std::mt19937 rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    // lhs in column 0 (10 groups of 10), rhs column 1 = f(lhs), noise column 2.
    std::size_t n = 100;
    std::vector<std::vector<int>> values(3, std::vector<int>(n));
    for (std::size_t r = 0; r < n; ++r) {
      values[0][r] = static_cast<int>(r % 10);
      values[1][r] = values[0][r] * 7 + 3;
      values[2][r] = static_cast<int>(rng() % 50);
    }
    std::size_t k = 1 + static_cast<std::size_t>(trial % 5);
    std::set<std::size_t> corrupted;
    while (corrupted.size() < k) corrupted.insert(rng() % n);
    for (auto r : corrupted) values[1][r] = 1000 + static_cast<int>(r);
    auto table = oracle::make_int_table(values);

    TypoPipelineConfig config;
    config.error_threshold = 0.08;
    config.max_lhs = 2;
    config.max_clusters_shown = 1000;
    auto result = find_typo_candidates(table, config);
    auto it = std::find_if(result.begin(), result.end(), [](TypoCandidates const& c) {
      return c.fd.rhs == 1 && c.fd.lhs == std::vector<std::size_t>{0};
    });
    REQUIRE(it != result.end());
    std::set<std::size_t> seen;
    for (auto const& c : it->clusters) {
      for (auto const& row : c.cluster.rows) seen.insert(row.row);
    }
    for (auto r : corrupted) CHECK(seen.count(r) == 1);

    auto fixed = apply_fixes(table, majority_fixes(*it));
    CHECK(fd_error(fixed, it->fd.lhs, 1) == 0.0);
  }
}
