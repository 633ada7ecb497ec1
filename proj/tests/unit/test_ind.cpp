#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "profiler/csv.hpp"
#include "profiler/errors.hpp"
#include "profiler/ind.hpp"

using namespace profiler;
namespace oracle = profiler::testing;

namespace {

bool has(std::vector<Ind> const& inds, Ind const& ind) {
  return std::find(inds.begin(), inds.end(), ind) != inds.end();
}

}  // namespace

TEST_CASE("two-table example") {
  auto s = parse_csv_text("X\n1\n2\n", {}, "S");
  auto t = parse_csv_text("Y\n1\n2\n3\n", {}, "T");
  std::vector<Table const*> tables{&s, &t};
  auto inds = discover_unary_inds(tables);
  Ind x_in_y{{0, 0}, {1, 0}};
  Ind y_in_x{{1, 0}, {0, 0}};
  CHECK(has(inds, x_in_y));
  CHECK_FALSE(has(inds, y_in_x));
  CHECK(to_string(x_in_y, tables) == "S.X ⊆ T.Y");

  auto check = validate_ind(tables, y_in_x);
  CHECK_FALSE(check.holds);
  CHECK(check.missing_values == std::vector<std::string>{"3"});
  CHECK(validate_ind(tables, Ind{{0, 0}, {0, 0}}).holds);
}

TEST_CASE("empty and duplicate columns") {
  auto t = parse_csv_text("P,Q,E\n1,1,\n2,2,\n", {}, "T");
  std::vector<Table const*> tables{&t};
  auto inds = discover_unary_inds(tables);
  CHECK(has(inds, {{0, 0}, {0, 1}}));
  CHECK(has(inds, {{0, 1}, {0, 0}}));
  CHECK(has(inds, {{0, 2}, {0, 0}}));
  CHECK(has(inds, {{0, 2}, {0, 1}}));
  CHECK_FALSE(has(inds, {{0, 0}, {0, 2}}));
  auto v = validate_ind(tables, {{0, 2}, {0, 0}});
  CHECK(v.holds);
  CHECK(v.missing_values.empty());
}

TEST_CASE("values compare as raw text") {
  auto t = parse_csv_text("a,b\n01,1\n", {}, "T");
  std::vector<Table const*> tables{&t};
  CHECK(discover_unary_inds(tables).empty());
}

TEST_CASE("missing values are a sorted, capped sample") {
  auto t = parse_csv_text("d,r\nz,a\ny,\nx,\nw,\na,\n", {}, "T");
  std::vector<Table const*> tables{&t};
  auto v = validate_ind(tables, {{0, 0}, {0, 1}}, 3);
  CHECK_FALSE(v.holds);
  CHECK(v.missing_values == std::vector<std::string>{"w", "x", "y"});
}

TEST_CASE("name resolution errors") {
  auto t = parse_csv_text("a\n1\n", {}, "T");
  std::vector<Table const*> tables{&t};
  CHECK(resolve_column(tables, "T", "a") == ColumnRef{0, 0});
  auto code = [&](auto fn) {
    try {
      fn();
    } catch (Error const& e) {
      return e.code();
    }
    return ErrorCode::kValidationError;
  };
  CHECK(code([&] { resolve_column(tables, "U", "a"); }) == ErrorCode::kUnknownTable);
  CHECK(code([&] { resolve_column(tables, "T", "b"); }) == ErrorCode::kUnknownColumn);
  CHECK(code([&] { validate_ind(tables, {{0, 3}, {0, 0}}); }) == ErrorCode::kUnknownColumn);
  CHECK(code([&] { validate_ind(tables, {{2, 0}, {0, 0}}); }) == ErrorCode::kUnknownTable);
}

TEST_CASE("random multi-table instances match brute force, in memory and spilled") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<std::size_t> table_count(1, 3), rows(1, 120);
    std::vector<Table> owned;
    auto n_tables = table_count(rng);
    std::size_t budget = 8;
    for (std::size_t i = 0; i < n_tables && budget > 0; ++i) {
      std::uniform_int_distribution<std::size_t> cols(1, std::min<std::size_t>(budget, 4));
      auto c = cols(rng);
      budget -= c;
      owned.push_back(oracle::make_int_table(oracle::random_values(rng, c, rows(rng), 1, 12),
                                             "t" + std::to_string(i)));
    }
    std::vector<Table const*> tables;
    for (auto const& t : owned) tables.push_back(&t);
    auto expected = oracle::brute_force_inds(tables);
    CHECK(discover_unary_inds(tables) == expected);
    IndOptions spill;
    spill.spill_threshold = 2;
    spill.thread_count = 3;
    CHECK(discover_unary_inds(tables, spill) == expected);
    // Transitivity witness.
    for (auto const& ab : expected) {
      for (auto const& bc : expected) {
        if (ab.referenced == bc.dependent && ab.dependent != bc.referenced) {
          CHECK(has(expected, {ab.dependent, bc.referenced}));
        }
      }
    }
  }
}
