#include "profiler/arm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "profiler/csv.hpp"
#include "profiler/errors.hpp"
#include "profiler/fd.hpp"
#include "profiler/parallel.hpp"

namespace profiler {

TransactionSet TransactionSet::from_names(std::vector<std::vector<std::string>> const& transactions) {
  if (transactions.empty()) throw Error(ErrorCode::kEmptyTransactions, "no transactions");
  TransactionSet set;
  std::unordered_map<std::string, ItemId> ids;
  for (auto const& names : transactions) {
    Itemset items;
    for (auto const& name : names) {
      auto [it, inserted] = ids.try_emplace(name, static_cast<ItemId>(set.names_.size()));
      if (inserted) set.names_.push_back(name);
      items.push_back(it->second);
    }
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    set.transactions_.push_back(std::move(items));
  }
  return set;
}

TransactionSet TransactionSet::from_singular_csv(std::string_view text, char separator, bool has_header) {
  auto records = tokenize_csv(text, separator).records;
  std::size_t first = has_header ? 1 : 0;
  if (!records.empty() && records.front().size() != 2) {
    throw MalformedCsvError(0, "singular transaction layout needs exactly two columns (transaction id, item)");
  }
  std::vector<std::vector<std::string>> grouped;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t r = first; r < records.size(); ++r) {
    auto const& id = records[r][0];
    auto const& item = records[r][1];
    if (!id) throw MalformedCsvError(r, "missing transaction id");
    auto [it, inserted] = slot.try_emplace(*id, grouped.size());
    if (inserted) grouped.emplace_back();
    if (item) grouped[it->second].push_back(*item);
  }
  return from_names(grouped);
}

TransactionSet TransactionSet::from_tabular_csv(std::string_view text, char separator, bool has_header) {
  auto records = tokenize_csv(text, separator, /*allow_ragged=*/true).records;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t r = has_header ? 1 : 0; r < records.size(); ++r) {
    std::vector<std::string> items;
    for (auto const& cell : records[r]) {
      if (cell && !cell->empty()) items.push_back(*cell);
    }
    rows.push_back(std::move(items));
  }
  return from_names(rows);
}

std::size_t TransactionSet::count_containing(Itemset const& items) const {
  return static_cast<std::size_t>(std::count_if(transactions_.begin(), transactions_.end(), [&](Itemset const& t) {
    return std::includes(t.begin(), t.end(), items.begin(), items.end());
  }));
}

MiningAlgorithm parse_mining_algorithm(std::string_view name) {
  if (name == "apriori") return MiningAlgorithm::kApriori;
  if (name == "fpgrowth" || name == "fp-growth") return MiningAlgorithm::kFpGrowth;
  throw Error(ErrorCode::kValidationError, "unknown mining algorithm '" + std::string(name) + "'");
}

std::size_t min_support_count(double min_support, std::size_t transactions) noexcept {
  auto needed = std::ceil(min_support * static_cast<double>(transactions) - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(needed));
}

namespace {

std::vector<ItemsetResult> apriori(TransactionSet const& set, std::size_t min_count, ExecutionControl* control) {
  std::vector<ItemsetResult> out;
  std::vector<std::size_t> item_counts(set.item_count(), 0);
  for (auto const& t : set.transactions()) {
    for (auto item : t) ++item_counts[item];
  }
  std::vector<Itemset> frequent;
  for (ItemId item = 0; item < set.item_count(); ++item) {
    if (item_counts[item] >= min_count) {
      frequent.push_back({item});
      out.push_back({{item}, 0.0, item_counts[item]});
    }
  }

  while (frequent.size() > 1) {
    checkpoint(control);
    // Join itemsets sharing all but the last item; prune by downward closure.
    std::vector<Itemset> candidates;
    for (std::size_t a = 0; a < frequent.size(); ++a) {
      for (std::size_t b = a + 1; b < frequent.size(); ++b) {
        auto const& x = frequent[a];
        auto const& y = frequent[b];
        if (!std::equal(x.begin(), x.end() - 1, y.begin())) break;
        Itemset candidate = x;
        candidate.push_back(y.back());
        bool closed = true;
        for (std::size_t drop = 0; drop + 2 < candidate.size() && closed; ++drop) {
          Itemset subset;
          for (std::size_t k = 0; k < candidate.size(); ++k) {
            if (k != drop) subset.push_back(candidate[k]);
          }
          closed = std::binary_search(frequent.begin(), frequent.end(), subset);
        }
        if (closed) candidates.push_back(std::move(candidate));
      }
    }
    std::vector<std::size_t> counts(candidates.size(), 0);
    for (auto const& t : set.transactions()) {
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (std::includes(t.begin(), t.end(), candidates[c].begin(), candidates[c].end())) ++counts[c];
      }
    }
    frequent.clear();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (counts[c] < min_count) continue;
      frequent.push_back(candidates[c]);
      out.push_back({candidates[c], 0.0, counts[c]});
    }
  }
  return out;
}

/// Prefix tree over transactions whose items are reordered by descending
/// frequency (ties by id).
class FpTree {
 public:
  struct Node {
    ItemId item = 0;
    std::size_t count = 0;
    std::int64_t parent = -1;
    std::vector<std::size_t> children;
  };

  using WeightedPath = std::pair<Itemset, std::size_t>;

  FpTree(std::vector<WeightedPath> const& paths, std::size_t item_space, std::size_t min_count) {
    std::vector<std::size_t> frequency(item_space, 0);
    for (auto const& [items, weight] : paths) {
      for (auto item : items) frequency[item] += weight;
    }
    for (ItemId item = 0; item < item_space; ++item) {
      if (frequency[item] >= min_count) order_.push_back(item);
    }
    std::sort(order_.begin(), order_.end(), [&](ItemId a, ItemId b) {
      return frequency[a] != frequency[b] ? frequency[a] > frequency[b] : a < b;
    });
    rank_.assign(item_space, -1);
    for (std::size_t r = 0; r < order_.size(); ++r) rank_[order_[r]] = static_cast<std::int64_t>(r);
    support_.assign(item_space, 0);
    for (auto item : order_) support_[item] = frequency[item];
    header_.resize(item_space);

    nodes_.push_back({});  // root
    Itemset ordered;
    for (auto const& [items, weight] : paths) {
      ordered.clear();
      for (auto item : items) {
        if (rank_[item] >= 0) ordered.push_back(item);
      }
      std::sort(ordered.begin(), ordered.end(), [&](ItemId a, ItemId b) { return rank_[a] < rank_[b]; });
      insert(ordered, weight);
    }
  }

  std::vector<ItemId> const& order() const noexcept { return order_; }
  std::size_t support(ItemId item) const { return support_[item]; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Prefix paths (root side excluded) of every node carrying `item`.
  std::vector<WeightedPath> prefix_paths(ItemId item) const {
    std::vector<WeightedPath> out;
    for (auto index : header_[item]) {
      Itemset path;
      for (auto p = nodes_[index].parent; p > 0; p = nodes_[static_cast<std::size_t>(p)].parent) {
        path.push_back(nodes_[static_cast<std::size_t>(p)].item);
      }
      if (!path.empty()) out.emplace_back(std::move(path), nodes_[index].count);
    }
    return out;
  }

 private:
  void insert(Itemset const& items, std::size_t weight) {
    std::size_t at = 0;
    for (auto item : items) {
      std::size_t next = 0;
      for (auto child : nodes_[at].children) {
        if (nodes_[child].item == item) {
          next = child;
          break;
        }
      }
      if (next == 0) {
        next = nodes_.size();
        nodes_.push_back({item, 0, static_cast<std::int64_t>(at), {}});
        nodes_[at].children.push_back(next);
        header_[item].push_back(next);
      }
      nodes_[next].count += weight;
      at = next;
    }
  }

  std::vector<Node> nodes_;
  std::vector<ItemId> order_;
  std::vector<std::int64_t> rank_;
  std::vector<std::size_t> support_;
  std::vector<std::vector<std::size_t>> header_;
};

void fp_growth_item(FpTree const& tree, ItemId item, Itemset const& suffix, std::size_t item_space,
                    std::size_t min_count, std::vector<ItemsetResult>& out, ExecutionControl* control);

void fp_growth(FpTree const& tree, Itemset const& suffix, std::size_t item_space, std::size_t min_count,
               std::vector<ItemsetResult>& out, ExecutionControl* control) {
  for (auto item : tree.order()) fp_growth_item(tree, item, suffix, item_space, min_count, out, control);
}

void fp_growth_item(FpTree const& tree, ItemId item, Itemset const& suffix, std::size_t item_space,
                    std::size_t min_count, std::vector<ItemsetResult>& out, ExecutionControl* control) {
  checkpoint(control);
  Itemset found = suffix;
  found.push_back(item);
  std::sort(found.begin(), found.end());
  out.push_back({found, 0.0, tree.support(item)});
  FpTree conditional(tree.prefix_paths(item), item_space, min_count);
  if (!conditional.order().empty()) fp_growth(conditional, found, item_space, min_count, out, control);
}

std::vector<ItemsetResult> fp_growth_root(TransactionSet const& set, std::size_t min_count, unsigned threads,
                                          ExecutionControl* control) {
  std::vector<FpTree::WeightedPath> paths;
  paths.reserve(set.size());
  for (auto const& t : set.transactions()) paths.emplace_back(t, 1);
  FpTree tree(paths, set.item_count(), min_count);
  charge_memory(control, static_cast<std::int64_t>(tree.node_count() * sizeof(FpTree::Node)));

  auto const& order = tree.order();
  std::vector<std::vector<ItemsetResult>> per_item(order.size());
  parallel_for(order.size(), threads, [&](std::size_t i) {
    fp_growth_item(tree, order[i], {}, set.item_count(), min_count, per_item[i], control);
  });
  charge_memory(control, -static_cast<std::int64_t>(tree.node_count() * sizeof(FpTree::Node)));
  std::vector<ItemsetResult> out;
  for (auto& part : per_item) {
    for (auto& r : part) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<ItemsetResult> mine_frequent_itemsets(TransactionSet const& transactions, double min_support,
                                                  MiningAlgorithm algorithm, ExecutionControl* control,
                                                  unsigned thread_count) {
  if (!(min_support > 0.0 && min_support <= 1.0)) {
    throw Error(ErrorCode::kValidationError, "min_support must lie in (0, 1]");
  }
  if (transactions.size() == 0) throw Error(ErrorCode::kEmptyTransactions, "no transactions");
  auto min_count = min_support_count(min_support, transactions.size());
  auto out = algorithm == MiningAlgorithm::kApriori ? apriori(transactions, min_count, control)
                                                    : fp_growth_root(transactions, min_count, thread_count, control);
  for (auto& r : out) r.support = static_cast<double>(r.count) / static_cast<double>(transactions.size());
  std::sort(out.begin(), out.end(), [](ItemsetResult const& a, ItemsetResult const& b) {
    return a.items.size() != b.items.size() ? a.items.size() < b.items.size() : a.items < b.items;
  });
  return out;
}

std::vector<Rule> derive_rules(std::span<ItemsetResult const> itemsets, double min_confidence,
                               ExecutionControl* control) {
  if (!(min_confidence > 0.0 && min_confidence <= 1.0)) {
    throw Error(ErrorCode::kValidationError, "min_confidence must lie in (0, 1]");
  }
  std::map<Itemset, ItemsetResult const*> by_items;
  for (auto const& r : itemsets) by_items.emplace(r.items, &r);

  std::vector<Rule> rules;
  for (auto const& whole : itemsets) {
    auto const size = whole.items.size();
    if (size < 2) continue;
    if (size > 30) throw Error(ErrorCode::kValidationError, "itemset too large to enumerate rules");
    checkpoint(control);
    for (std::uint32_t mask = 1; mask + 1 < (std::uint32_t{1} << size); ++mask) {
      Itemset antecedent, consequent;
      for (std::size_t k = 0; k < size; ++k) {
        ((mask >> k) & 1u ? antecedent : consequent).push_back(whole.items[k]);
      }
      auto it = by_items.find(antecedent);
      if (it == by_items.end()) {
        throw Error(ErrorCode::kNotDownwardClosed, "support of a subset of a frequent itemset is missing");
      }
      auto const& base = *it->second;
      double confidence = (whole.count > 0 && base.count > 0)
                              ? static_cast<double>(whole.count) / static_cast<double>(base.count)
                              : whole.support / base.support;
      if (confidence + 1e-12 < min_confidence) continue;
      rules.push_back({std::move(antecedent), std::move(consequent), whole.support, confidence});
    }
  }
  std::sort(rules.begin(), rules.end(), [](Rule const& a, Rule const& b) {
    return a.antecedent != b.antecedent ? a.antecedent < b.antecedent : a.consequent < b.consequent;
  });
  return rules;
}

std::string format_items(Itemset const& items, TransactionSet const& transactions) {
  std::string out = "{";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += transactions.item_name(items[i]);
  }
  return out + "}";
}

std::string to_string(ItemsetResult const& itemset, TransactionSet const& transactions) {
  return format_items(itemset.items, transactions) + " (support=" + format_real(itemset.support) + ")";
}

std::string to_string(Rule const& rule, TransactionSet const& transactions) {
  return format_items(rule.antecedent, transactions) + " -> " + format_items(rule.consequent, transactions) +
         " (sup=" + format_real(rule.support) + ", conf=" + format_real(rule.confidence) + ")";
}

}  // namespace profiler
