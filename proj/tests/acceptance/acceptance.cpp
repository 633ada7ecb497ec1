// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
// Every bound is pinned below and checked as stated, never relaxed.

#include <sys/resource.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "engine_support.hpp"
#include "httplib.h"
#include "oracles.hpp"
#include "profiler/arm.hpp"
#include "profiler/engine/http_api.hpp"
#include "profiler/fd.hpp"
#include "profiler/ind.hpp"
#include "profiler/mfd.hpp"
#include "profiler/typo.hpp"

using namespace profiler;
namespace oracle = profiler::testing;
using Clock = std::chrono::steady_clock;
using nlohmann::json;

namespace {

constexpr int kFdTables = 50;
constexpr std::size_t kFdMaxColumns = 6;
constexpr std::size_t kFdMaxRows = 100;
constexpr auto kFdTimeLimit = std::chrono::seconds(60);

constexpr int kG3Tables = 30;
constexpr std::size_t kG3MaxColumns = 5;
constexpr std::size_t kG3MaxRows = 12;

constexpr int kMfdTables = 100;
constexpr int kMfdDeltaSweep = 10;

constexpr int kIndInstances = 30;
constexpr std::size_t kIndMaxColumns = 8;
constexpr std::size_t kIndMaxRows = 500;

constexpr int kMiningSets = 50;

constexpr int kTypoTables = 20;

constexpr int kResilienceTasks = 5;
/// Longest stretch an executor may run between two checkpoints.
constexpr auto kCheckpointInterval = std::chrono::seconds(1);
constexpr auto kCancelLimit = kCheckpointInterval + std::chrono::seconds(1);

constexpr std::size_t kPerfRows = 10'000;
constexpr std::size_t kPerfColumns = 10;
constexpr std::size_t kPerfMaxLhs = 5;
constexpr auto kPerfTimeLimit = std::chrono::seconds(30);
constexpr long kPerfMemoryLimitKb = 1024L * 1024L;  // 1 GiB

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double value, int digits = 2) {
  std::ostringstream out;
  out.precision(digits);
  out << std::fixed << value;
  return out.str();
}

long peak_rss_kb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss;
}

std::set<std::pair<std::vector<std::size_t>, std::size_t>> fd_keys(std::vector<Fd> const& fds) {
  std::set<std::pair<std::vector<std::size_t>, std::size_t>> out;
  for (auto const& f : fds) out.insert({f.lhs, f.rhs});
  return out;
}

Outcome fd_oracle_equivalence() {
  std::mt19937 rng(101);
  auto start = Clock::now();
  int mismatches = 0;
  for (int trial = 0; trial < kFdTables; ++trial) {
    std::uniform_int_distribution<std::size_t> cols(1, kFdMaxColumns), rows(1, kFdMaxRows);
    auto columns = cols(rng);
    auto table = oracle::make_int_table(oracle::random_values(rng, columns, rows(rng), 2, 5));
    auto found = fd_keys(discover_fds(table, {columns, 0.0, 1}));
    std::set<std::pair<std::vector<std::size_t>, std::size_t>> expected;
    for (auto const& f : oracle::brute_force_minimal_fds(table, columns, 0.0)) expected.insert({f.lhs, f.rhs});
    if (found != expected) ++mismatches;
  }
  auto elapsed = seconds_since(start);
  return {mismatches == 0 && Clock::now() - start < kFdTimeLimit,
          std::to_string(kFdTables) + " tables, " + std::to_string(mismatches) + " mismatches, " + fixed(elapsed) +
              " s (limit 60 s)"};
}

Outcome g3_exact() {
  std::mt19937 rng(202);
  std::size_t checked = 0;
  std::size_t wrong = 0;
  for (int trial = 0; trial < kG3Tables; ++trial) {
    std::uniform_int_distribution<std::size_t> cols(2, kG3MaxColumns), rows(1, kG3MaxRows);
    auto columns = cols(rng);
    auto table = oracle::make_int_table(oracle::random_values(rng, columns, rows(rng), 2, 4));
    auto n = table.row_count();
    for (std::size_t rhs = 0; rhs < columns; ++rhs) {
      std::vector<std::size_t> others;
      for (std::size_t c = 0; c < columns; ++c) {
        if (c != rhs) others.push_back(c);
      }
      for (auto const& lhs : oracle::subsets_of(others, others.size())) {
        auto expected = oracle::g3_removals_exhaustive(table, lhs, rhs);
        auto removals = g3_removals(table, lhs, rhs);
        // Same denominator n: compare numerators exactly, then the value as
        // the correctly rounded quotient.
        bool ok = removals == expected &&
                  fd_error(table, lhs, rhs) == static_cast<double>(expected) / static_cast<double>(n);
        wrong += !ok;
        ++checked;
      }
    }
  }
  auto t1 = oracle::make_t1();
  std::vector<std::size_t> a{0};
  bool t1_ok = fd_error(t1, a, 2) == 0.25 && g3_removals(t1, a, 2) == 1;
  return {wrong == 0 && t1_ok, std::to_string(checked) + " (lhs, rhs) pairs on " + std::to_string(kG3Tables) +
                                   " tables, " + std::to_string(wrong) + " mismatches; T1 g3(A->C) " +
                                   (t1_ok ? "= 1/4" : "!= 1/4")};
}

Outcome mfd_consistency() {
  std::mt19937 rng(303);
  int disagreements = 0;
  int monotonicity_breaks = 0;
  int oracle_mismatches = 0;
  for (int trial = 0; trial < kMfdTables; ++trial) {
    std::uniform_int_distribution<std::size_t> rows(2, 60);
    auto table = oracle::make_int_table(oracle::random_values(rng, 3, rows(rng), 2, 8));
    std::vector<std::size_t> lhs{0};
    if (trial % 2 == 1) lhs.push_back(1);
    auto mfd0 = validate_mfd(table, {lhs, {2}, MfdMetric::kAbsoluteDifference, 0.0});
    if (mfd0.holds != validate_fd(table, lhs, 2, 0.0).holds) ++disagreements;
    bool held = false;
    for (int step = 0; step < kMfdDeltaSweep; ++step) {
      double delta = 0.8 * step;
      bool holds = validate_mfd(table, {lhs, {2}, MfdMetric::kAbsoluteDifference, delta}).holds;
      if (held && !holds) ++monotonicity_breaks;
      if (holds != oracle::mfd_holds_pairwise(table, lhs, 2, delta)) ++oracle_mismatches;
      held = holds;
    }
  }
  return {disagreements == 0 && monotonicity_breaks == 0 && oracle_mismatches == 0,
          std::to_string(kMfdTables) + " tables, delta=0 vs FD disagreements " + std::to_string(disagreements) +
              ", monotonicity breaks " + std::to_string(monotonicity_breaks) + " over " +
              std::to_string(kMfdDeltaSweep) + " deltas, pairwise oracle mismatches " +
              std::to_string(oracle_mismatches)};
}

Outcome ind_oracle_equivalence() {
  std::mt19937 rng(404);
  int mismatches = 0;
  for (int trial = 0; trial < kIndInstances; ++trial) {
    std::uniform_int_distribution<std::size_t> table_count(1, 4), rows(1, kIndMaxRows);
    std::vector<Table> owned;
    std::size_t budget = kIndMaxColumns;
    auto n_tables = table_count(rng);
    for (std::size_t i = 0; i < n_tables && budget > 0; ++i) {
      std::uniform_int_distribution<std::size_t> cols(1, std::min<std::size_t>(budget, 4));
      auto c = cols(rng);
      budget -= c;
      owned.push_back(oracle::make_int_table(oracle::random_values(rng, c, rows(rng), 1, 40), "t" + std::to_string(i)));
    }
    std::vector<Table const*> tables;
    for (auto const& t : owned) tables.push_back(&t);
    auto expected = oracle::brute_force_inds(tables);
    IndOptions spill;
    spill.spill_threshold = 16;
    spill.thread_count = 2;
    if (discover_unary_inds(tables) != expected || discover_unary_inds(tables, spill) != expected) ++mismatches;
  }
  return {mismatches == 0, std::to_string(kIndInstances) + " instances (in memory and spilled), " +
                               std::to_string(mismatches) + " mismatches"};
}

Outcome mining_agreement() {
  std::mt19937 rng(505);
  int mismatches = 0;
  for (int trial = 0; trial < kMiningSets; ++trial) {
    auto set = oracle::random_transactions(rng);
    double min_support = std::uniform_real_distribution<double>(0.05, 0.8)(rng);
    auto apriori = mine_frequent_itemsets(set, min_support, MiningAlgorithm::kApriori);
    auto fp = mine_frequent_itemsets(set, min_support, MiningAlgorithm::kFpGrowth);
    std::map<Itemset, std::size_t> a;
    std::map<Itemset, std::size_t> f;
    for (auto const& r : apriori) a[r.items] = r.count;
    for (auto const& r : fp) f[r.items] = r.count;
    auto expected = oracle::enumerate_frequent_itemsets(set.transactions(), set.item_count(),
                                                        min_support_count(min_support, set.size()));
    if (a != f || a != expected) ++mismatches;
  }
  auto baskets = oracle::make_baskets();
  bool example_ok = true;
  for (auto algorithm : {MiningAlgorithm::kApriori, MiningAlgorithm::kFpGrowth}) {
    auto itemsets = mine_frequent_itemsets(baskets, 0.6, algorithm);
    example_ok = example_ok && itemsets.size() == 8;
    bool rule = false;
    for (auto const& r : derive_rules(itemsets, 0.7)) {
      if (format_items(r.antecedent, baskets) == "{diaper}" && format_items(r.consequent, baskets) == "{beer}") {
        rule = r.confidence == 0.75;
      }
    }
    example_ok = example_ok && rule;
  }
  return {mismatches == 0 && example_ok,
          std::to_string(kMiningSets) + " sets, " + std::to_string(mismatches) +
              " mismatches; baskets: 8 itemsets at 0.6 and {diaper} -> {beer} conf 0.75 " +
              (example_ok ? "found" : "missing")};
}

Outcome typo_recovery() {
  std::mt19937 rng(606);
  int missed = 0;
  int unfixed = 0;
  for (int trial = 0; trial < kTypoTables; ++trial) {
    std::size_t n = 120;
    std::vector<std::vector<int>> values(3, std::vector<int>(n));
    for (std::size_t r = 0; r < n; ++r) {
      values[0][r] = static_cast<int>(r % 12);
      values[1][r] = values[0][r] * 11 + 5;
      values[2][r] = static_cast<int>(rng() % 60);
    }
    std::size_t k = 1 + static_cast<std::size_t>(trial % 5);
    std::set<std::size_t> corrupted;
    while (corrupted.size() < k) corrupted.insert(rng() % n);
    for (auto r : corrupted) values[1][r] = 5000 + static_cast<int>(rng() % 3);
    auto table = oracle::make_int_table(values);

    TypoPipelineConfig config;
    config.error_threshold = 0.06;
    config.max_lhs = 2;
    config.max_clusters_shown = 1000;
    auto result = find_typo_candidates(table, config);
    auto it = std::find_if(result.begin(), result.end(), [](TypoCandidates const& c) {
      return c.fd.rhs == 1 && c.fd.lhs == std::vector<std::size_t>{0};
    });
    if (it == result.end()) {
      ++missed;
      ++unfixed;
      continue;
    }
    std::set<std::size_t> seen;
    for (auto const& c : it->clusters) {
      for (auto const& row : c.cluster.rows) seen.insert(row.row);
    }
    if (!std::includes(seen.begin(), seen.end(), corrupted.begin(), corrupted.end())) ++missed;
    auto fixed_table = apply_fixes(table, majority_fixes(*it));
    if (fd_error(fixed_table, it->fd.lhs, it->fd.rhs) != 0.0) ++unfixed;
  }
  return {missed == 0 && unfixed == 0, std::to_string(kTypoTables) + " tables with k in 1..5, " +
                                           std::to_string(missed) + " with unreported corruptions, " +
                                           std::to_string(unfixed) + " not fixed to g3=0"};
}

Outcome engine_resilience() {
  oracle::TempDir dir;
  engine::EngineConfig config;
  config.data_dir = dir.path() / "data";
  config.workers = kResilienceTasks;
  config.allow_fault_injection = true;
  engine::Engine eng(config);
  engine::HttpApi api(eng);
  auto port = api.bind("127.0.0.1", 0);
  api.start();

  std::atomic<bool> polling{true};
  std::atomic<int> answered{0};
  std::atomic<int> unanswered{0};
  std::jthread poller([&] {
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(5, 0);
    while (polling) {
      auto res = client.Get("/api/tasks");
      if (res && res->status == 200) {
        ++answered;
      } else {
        ++unanswered;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  });

  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(30, 0);
  auto post = [&](std::string const& path, json const& body) {
    auto res = client.Post(path, body.dump(), "application/json");
    return res ? json::parse(res->body) : json();
  };
  auto state_of = [&](std::string const& task) {
    auto res = client.Get("/api/tasks/" + task);
    return res ? json::parse(res->body).value("state", std::string("?")) : std::string("?");
  };
  auto wait_terminal = [&](std::string const& task, std::chrono::seconds limit) {
    auto deadline = Clock::now() + limit;
    std::string state = state_of(task);
    while ((state == "queued" || state == "running") && Clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      state = state_of(task);
    }
    return state;
  };

  auto medium = post("/api/datasets", {{"name", "medium"}, {"content", oracle::slow_fd_csv(4000, 14, 11)}});
  auto slow = post("/api/datasets", {{"name", "slow"}, {"content", oracle::slow_fd_csv()}});
  bool ok = medium.contains("id") && slow.contains("id");
  int rounds_ok = 0;
  std::vector<std::string> faults{"throw", "throw_unknown", "bad_alloc"};
  for (auto const& fault : faults) {
    if (!ok) break;
    std::vector<std::string> ids;
    for (int i = 0; i < kResilienceTasks; ++i) {
      json params = {{"max_lhs", 3}};
      if (i == 2) params["fault_injection"] = fault;
      auto status = post("/api/tasks", {{"kind", "discover_fd"}, {"datasets", medium.at("id")}, {"params", params}});
      ids.push_back(status.value("id", std::string()));
    }
    bool round = true;
    for (int i = 0; i < kResilienceTasks; ++i) {
      auto state = wait_terminal(ids[static_cast<std::size_t>(i)], std::chrono::seconds(120));
      round = round && state == (i == 2 ? "failed" : "done");
    }
    rounds_ok += round;
  }

  double cancel_seconds = -1.0;
  std::string cancel_state = "?";
  if (ok) {
    auto task = post("/api/tasks", {{"kind", "discover_fd"}, {"datasets", slow.at("id")}}).value("id", std::string());
    auto deadline = Clock::now() + std::chrono::seconds(30);
    while (state_of(task) != "running" && Clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(300));  // well inside the search
    auto asked = Clock::now();
    post("/api/tasks/" + task + "/cancel", json::object());
    cancel_state = wait_terminal(task, std::chrono::seconds(30));
    cancel_seconds = seconds_since(asked);
  }

  polling = false;
  poller.join();
  api.stop();
  bool cancel_ok = cancel_state == "cancelled" && cancel_seconds >= 0.0 &&
                   cancel_seconds < std::chrono::duration<double>(kCancelLimit).count();
  bool pass = ok && rounds_ok == static_cast<int>(faults.size()) && unanswered == 0 && answered > 0 && cancel_ok;
  return {pass, std::to_string(rounds_ok) + "/" + std::to_string(faults.size()) +
                    " fault rounds with 1 failed + 4 done of 5 concurrent; API answered " + std::to_string(answered) +
                    " polls, missed " + std::to_string(unanswered) + "; cancel -> " + cancel_state + " in " +
                    fixed(cancel_seconds) + " s (limit 2 s)"};
}

/// Mixed synthetic table: independent columns of varied cardinality plus
/// derived columns so that real dependencies exist at several lattice levels.
Table performance_table() {
  std::mt19937 rng(808);
  std::vector<int> cardinality{2, 3, 5, 7, 11, 13, 50};
  std::vector<std::vector<int>> values(kPerfColumns, std::vector<int>(kPerfRows));
  for (std::size_t r = 0; r < kPerfRows; ++r) {
    for (std::size_t c = 0; c < cardinality.size(); ++c) values[c][r] = static_cast<int>(rng() % cardinality[c]);
    values[7][r] = (values[0][r] * 3 + values[1][r]) % 6;
    values[8][r] = values[2][r] + 5 * values[3][r];
    values[9][r] = static_cast<int>(rng() % 9000);
  }
  return oracle::make_int_table(values, "perf");
}

Outcome performance_smoke() {
  auto table = performance_table();
  auto start = Clock::now();
  auto one = discover_fds(table, {kPerfMaxLhs, 0.0, 1});
  auto t_one = seconds_since(start);
  start = Clock::now();
  auto four = discover_fds(table, {kPerfMaxLhs, 0.0, 4});
  auto t_four = seconds_since(start);
  auto rss = peak_rss_kb();
  double limit = std::chrono::duration<double>(kPerfTimeLimit).count();
  bool same = one == four;
  return {t_one < limit && t_four < limit && rss < kPerfMemoryLimitKb && same,
          std::to_string(kPerfRows) + "x" + std::to_string(kPerfColumns) + ", max_lhs 5: " +
              std::to_string(one.size()) + " FDs; 1 thread " + fixed(t_one) + " s, 4 threads " + fixed(t_four) +
              " s (limit 30 s); peak RSS " + std::to_string(rss / 1024) + " MiB (limit 1024); results " +
              (same ? "identical" : "differ")};
}

}  // namespace

int main() {
  std::vector<std::pair<char const*, std::function<Outcome()>>> criteria{
      {"fd_oracle_equivalence", fd_oracle_equivalence},
      {"g3_exact", g3_exact},
      {"mfd_consistency", mfd_consistency},
      {"ind_oracle_equivalence", ind_oracle_equivalence},
      {"mining_agreement", mining_agreement},
      {"typo_recovery", typo_recovery},
      {"engine_resilience", engine_resilience},
      {"performance_smoke", performance_smoke},
  };
  int failures = 0;
  for (auto const& [name, check] : criteria) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (std::exception const& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    failures += !outcome.pass;
    std::printf("%s %s: %s\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
