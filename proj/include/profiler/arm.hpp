#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "profiler/execution.hpp"

namespace profiler {

using ItemId = std::uint32_t;
using Itemset = std::vector<ItemId>;  // ascending, unique

/// Transactions over a dictionary of item names. Item ids are assigned in
/// first-occurrence order.
class TransactionSet {
 public:
  TransactionSet() = default;

  /// Items repeated inside one transaction are collapsed. Throws
  /// Error{kEmptyTransactions} when `transactions` is empty.
  static TransactionSet from_names(std::vector<std::vector<std::string>> const& transactions);

  /// "singular" layout: two columns (transaction id, item), one row per item;
  /// transactions keep first-appearance order of their ids.
  static TransactionSet from_singular_csv(std::string_view text, char separator, bool has_header);
  /// "tabular" layout: one row per transaction, every non-empty cell an item.
  static TransactionSet from_tabular_csv(std::string_view text, char separator, bool has_header);

  std::size_t size() const noexcept { return transactions_.size(); }
  std::size_t item_count() const noexcept { return names_.size(); }
  std::vector<Itemset> const& transactions() const noexcept { return transactions_; }
  std::string const& item_name(ItemId id) const { return names_.at(id); }

  std::size_t count_containing(Itemset const& items) const;

 private:
  std::vector<Itemset> transactions_;
  std::vector<std::string> names_;
};

struct ItemsetResult {
  Itemset items;
  double support = 0.0;
  std::size_t count = 0;  // transactions containing `items`
};

struct Rule {
  Itemset antecedent;
  Itemset consequent;
  double support = 0.0;
  double confidence = 0.0;
};

enum class MiningAlgorithm { kApriori, kFpGrowth };

/// Throws Error{kValidationError} on an unknown name.
MiningAlgorithm parse_mining_algorithm(std::string_view name);

/// Smallest transaction count meeting a fractional support.
std::size_t min_support_count(double min_support, std::size_t transactions) noexcept;

/// Every itemset with support >= min_support, sorted by (size, items).
/// FP-Growth fans the top-level conditional trees out to `thread_count` workers.
/// Throws Error{kValidationError} unless 0 < min_support <= 1 and
/// Error{kEmptyTransactions} for an empty set.
std::vector<ItemsetResult> mine_frequent_itemsets(TransactionSet const& transactions, double min_support,
                                                  MiningAlgorithm algorithm, ExecutionControl* control = nullptr,
                                                  unsigned thread_count = 1);

/// Rules X -> Y with X non-empty, Y non-empty, X and Y disjoint, X ∪ Y frequent
/// and confidence >= min_confidence. Sorted by (antecedent, consequent).
/// Throws Error{kNotDownwardClosed} when a needed subset is missing.
std::vector<Rule> derive_rules(std::span<ItemsetResult const> itemsets, double min_confidence,
                               ExecutionControl* control = nullptr);

/// "{a,b} (support=0.6)"
std::string to_string(ItemsetResult const& itemset, TransactionSet const& transactions);
/// "{a} -> {b} (sup=0.6, conf=0.75)"
std::string to_string(Rule const& rule, TransactionSet const& transactions);
std::string format_items(Itemset const& items, TransactionSet const& transactions);

}  // namespace profiler
