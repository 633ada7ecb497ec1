#include "profiler/engine/executors.hpp"

#include <algorithm>
#include <new>
#include <stdexcept>

#include "profiler/arm.hpp"
#include "profiler/errors.hpp"
#include "profiler/fd.hpp"
#include "profiler/ind.hpp"
#include "profiler/mfd.hpp"
#include "profiler/stats.hpp"

namespace profiler::engine {

using nlohmann::json;

namespace {

json cell_json(Cell const& cell) { return cell ? json(*cell) : json(nullptr); }

json cells_json(std::vector<Cell> const& cells) {
  json out = json::array();
  for (auto const& c : cells) out.push_back(cell_json(c));
  return out;
}

std::string cell_text(Cell const& cell) { return cell ? *cell : "NULL"; }

template <class T>
T param(json const& params, char const* name, T fallback) {
  return params.contains(name) ? params.at(name).get<T>() : fallback;
}

unsigned threads_param(json const& params) { return param<unsigned>(params, "threads", 1); }

TableOptions table_options(TaskSpec const& spec, TaskInputs const& inputs, std::string const& dataset) {
  auto options = inputs.defaults ? inputs.defaults(dataset) : TableOptions{};
  if (spec.params.contains("separator")) options.separator = spec.params.at("separator").get<std::string>().at(0);
  if (spec.params.contains("has_header")) options.has_header = spec.params.at("has_header").get<bool>();
  if (spec.params.contains("null_equal")) {
    options.null_mode = spec.params.at("null_equal").get<bool>() ? NullMode::kNullEqual : NullMode::kNullDistinct;
  }
  return options;
}

std::shared_ptr<Table const> load_table(TaskSpec const& spec, TaskInputs const& inputs, std::size_t i = 0) {
  return inputs.table(spec.dataset_ids.at(i), table_options(spec, inputs, spec.dataset_ids.at(i)));
}

std::vector<std::size_t> column_list(Table const& table, json const& value) {
  std::vector<std::size_t> out;
  if (value.is_array()) {
    for (auto const& v : value) out.push_back(resolve_column_param(table, v));
  } else {
    out.push_back(resolve_column_param(table, value));
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw Error(ErrorCode::kValidationError, "a column is listed twice");
  }
  return out;
}

std::vector<std::string> names_of(Table const& table, std::vector<std::size_t> const& columns) {
  std::vector<std::string> out;
  for (auto c : columns) out.push_back(table.column(c).name());
  return out;
}

json fd_json(Fd const& fd, Table const& table) {
  return {
      {"lhs", names_of(table, fd.lhs)},
      {"rhs", table.column(fd.rhs).name()},
      {"lhs_index", fd.lhs},
      {"rhs_index", fd.rhs},
      {"error", fd.error},
  };
}

json violation_rows_json(ViolationCluster const& cluster) {
  json rows = json::array();
  for (auto const& entry : cluster.rows) rows.push_back({{"row", entry.row}, {"rhs", cell_json(entry.rhs)}});
  return rows;
}

std::string lhs_text(std::vector<Cell> const& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += cell_text(values[i]);
  }
  return out + "]";
}

void inject_fault(json const& params) {
  if (!params.contains("fault_injection")) return;
  auto kind = params.at("fault_injection").get<std::string>();
  if (kind == "throw") throw std::runtime_error("injected executor fault");
  if (kind == "bad_alloc") throw std::bad_alloc();
  throw 42;
}

TaskResult run_discover_fd(TaskSpec const& spec, TaskInputs const& inputs, ExecutionControl& control) {
  auto table = load_table(spec, inputs);
  FdDiscoveryConfig config;
  config.error_threshold = param(spec.params, "error", 0.0);
  config.max_lhs = param<std::size_t>(spec.params, "max_lhs", 4);
  config.thread_count = threads_param(spec.params);
  auto fds = discover_fds(*table, config, &control);
  TaskResult result;
  for (auto const& fd : fds) result.items.push_back({fd_json(fd, *table), to_string(fd, *table)});
  result.summary = {
      {"count", fds.size()},
      {"rows", table->row_count()},
      {"columns", table->column_count()},
      {"error_threshold", config.error_threshold},
      {"max_lhs", config.max_lhs},
  };
  return result;
}

TaskResult run_validate_fd(TaskSpec const& spec, TaskInputs const& inputs, ExecutionControl& control) {
  auto table = load_table(spec, inputs);
  auto lhs = column_list(*table, spec.params.at("lhs"));
  auto rhs = resolve_column_param(*table, spec.params.at("rhs"));
  if (std::find(lhs.begin(), lhs.end(), rhs) != lhs.end()) {
    throw Error(ErrorCode::kValidationError, "rhs must not be part of lhs");
  }
  checkpoint(&control);
  double threshold = param(spec.params, "error", 0.0);
  auto report = validate_fd(*table, lhs, rhs, threshold);
  TaskResult result;
  for (auto const& cluster : report.clusters) {
    json data{
        {"lhs_value", cells_json(cluster.lhs_value)},
        {"size", cluster.rows.size()},
        {"distinct_rhs_count", cluster.distinct_rhs_count},
        {"majority_rhs", cell_json(cluster.majority_rhs)},
        {"majority_count", cluster.majority_count},
        {"rows", violation_rows_json(cluster)},
    };
    std::string text = lhs_text(cluster.lhs_value) + " size=" + std::to_string(cluster.rows.size()) +
                       " majority=" + cell_text(cluster.majority_rhs) + ":";
    for (auto const& entry : cluster.rows) text += " " + std::to_string(entry.row) + "=" + cell_text(entry.rhs);
    result.items.push_back({std::move(data), std::move(text)});
  }
  Fd fd{lhs, rhs, report.error};
  result.summary = {
      {"fd", to_string(fd, *table)},
      {"lhs", names_of(*table, lhs)},
      {"rhs", table->column(rhs).name()},
      {"holds", report.holds},
      {"error", report.error},
      {"threshold", threshold},
      {"cluster_count", report.clusters.size()},
  };
  return result;
}

TaskResult run_validate_mfd(TaskSpec const& spec, TaskInputs const& inputs, ExecutionControl& control) {
  auto table = load_table(spec, inputs);
  MfdQuery query;
  query.lhs = column_list(*table, spec.params.at("lhs"));
  query.rhs = column_list(*table, spec.params.at("rhs"));
  query.metric = parse_mfd_metric(spec.params.at("metric").get<std::string>());
  query.delta = spec.params.at("delta").get<double>();
  auto report = validate_mfd(*table, query, &control);
  auto sort_key = parse_mfd_sort_key(param<std::string>(spec.params, "sort", "index"));
  sort_clusters(report.clusters, sort_key);

  TaskResult result;
  for (auto const& cluster : report.clusters) {
    json points = json::array();
    for (auto const& p : cluster.points) {
      points.push_back({
          {"row", p.row},
          {"value", to_string(p.value)},
          {"outlier", p.is_outlier},
          {"min_distance", p.min_distance},
          {"max_distance", p.max_distance},
      });
    }
    json data{
        {"lhs_value", cells_json(cluster.lhs_value)},
        {"size", cluster.points.size()},
        {"diameter", cluster.diameter},
        {"outlier_count", cluster.outlier_count()},
        {"points", std::move(points)},
    };
    std::string text = lhs_text(cluster.lhs_value) + " diameter=" + format_real(cluster.diameter) +
                       " outliers=" + std::to_string(cluster.outlier_count()) + ":";
    for (auto const& p : cluster.points) {
      text += " " + std::string(p.is_outlier ? "x" : "") + std::to_string(p.row) + "=" + to_string(p.value);
    }
    result.items.push_back({std::move(data), std::move(text)});
  }
  result.summary = {
      {"holds", report.holds},
      {"lhs", names_of(*table, query.lhs)},
      {"rhs", names_of(*table, query.rhs)},
      {"metric", mfd_metric_name(query.metric)},
      {"delta", query.delta},
      {"sort", param<std::string>(spec.params, "sort", "index")},
      {"cluster_count", report.clusters.size()},
  };
  return result;
}

struct TableGroup {
  std::vector<std::shared_ptr<Table const>> owned;
  std::vector<Table const*> tables;
};

TableGroup load_tables(TaskSpec const& spec, TaskInputs const& inputs) {
  TableGroup group;
  for (std::size_t i = 0; i < spec.dataset_ids.size(); ++i) {
    group.owned.push_back(load_table(spec, inputs, i));
    group.tables.push_back(group.owned.back().get());
  }
  return group;
}

json column_ref_json(ColumnRef const& ref, std::span<Table const* const> tables, std::vector<std::string> const& ids) {
  return {
      {"dataset", ids.at(ref.table)},
      {"table", tables[ref.table]->name()},
      {"column", tables[ref.table]->column(ref.column).name()},
  };
}

ColumnRef resolve_ref(json const& value, std::span<Table const* const> tables, std::vector<std::string> const& ids) {
  auto table_index = [&](std::string const& key) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] == key) return i;
    }
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (tables[i]->name() == key) return i;
    }
    return std::nullopt;
  };
  if (value.is_object()) {
    auto key = value.at("dataset").get<std::string>();
    auto t = table_index(key);
    if (!t) throw Error(ErrorCode::kUnknownTable, "no table '" + key + "' among the task's datasets");
    auto const& column = value.at("column");
    if (column.is_number_integer()) {
      auto c = column.get<std::size_t>();
      if (c >= tables[*t]->column_count()) {
        throw Error(ErrorCode::kUnknownColumn, "column " + std::to_string(c) + " out of range");
      }
      return {*t, c};
    }
    return resolve_column(tables, tables[*t]->name(), column.get<std::string>());
  }
  // "table.column": the table part may itself contain dots, so try each split.
  auto text = value.get<std::string>();
  for (auto dot = text.find('.'); dot != std::string::npos; dot = text.find('.', dot + 1)) {
    auto t = table_index(text.substr(0, dot));
    if (!t) continue;
    auto column = tables[*t]->find_column(text.substr(dot + 1));
    if (!column) throw Error(ErrorCode::kUnknownColumn, "no column '" + text.substr(dot + 1) + "'");
    return {*t, *column};
  }
  throw Error(ErrorCode::kUnknownTable, "no table matches '" + text + "'");
}

TaskResult run_discover_ind(TaskSpec const& spec, TaskInputs const& inputs, ExecutionControl& control) {
  auto group = load_tables(spec, inputs);
  IndOptions options;
  options.thread_count = threads_param(spec.params);
  options.spill_threshold = param<std::size_t>(spec.params, "spill_threshold", options.spill_threshold);
  auto inds = discover_unary_inds(group.tables, options, &control);
  TaskResult result;
  for (auto const& ind : inds) {
    result.items.push_back({{{"dependent", column_ref_json(ind.dependent, group.tables, spec.dataset_ids)},
                             {"referenced", column_ref_json(ind.referenced, group.tables, spec.dataset_ids)}},
                            to_string(ind, group.tables)});
  }
  result.summary = {{"count", inds.size()}, {"tables", group.tables.size()}};
  return result;
}

TaskResult run_validate_ind(TaskSpec const& spec, TaskInputs const& inputs, ExecutionControl& control) {
  auto group = load_tables(spec, inputs);
  Ind ind{resolve_ref(spec.params.at("dependent"), group.tables, spec.dataset_ids),
          resolve_ref(spec.params.at("referenced"), group.tables, spec.dataset_ids)};
  checkpoint(&control);
  auto check = validate_ind(group.tables, ind, param<std::size_t>(spec.params, "max_missing", 10));
  TaskResult result;
  for (auto const& v : check.missing_values) result.items.push_back({{{"value", v}}, v});
  result.summary = {
      {"ind", to_string(ind, group.tables)},
      {"dependent", column_ref_json(ind.dependent, group.tables, spec.dataset_ids)},
      {"referenced", column_ref_json(ind.referenced, group.tables, spec.dataset_ids)},
      {"holds", check.holds},
      {"missing_values", check.missing_values},
  };
  return result;
}

TaskResult run_mine_rules(TaskSpec const& spec, TaskInputs const& inputs, ExecutionControl& control) {
  auto const& id = spec.dataset_ids.front();
  auto options = table_options(spec, inputs, id);
  auto text = inputs.text(id);
  auto format = param<std::string>(spec.params, "input_format", "tabular");
  auto transactions = format == "singular"
                          ? TransactionSet::from_singular_csv(text, options.separator, options.has_header)
                          : TransactionSet::from_tabular_csv(text, options.separator, options.has_header);
  auto min_support = spec.params.at("min_support").get<double>();
  auto min_confidence = param(spec.params, "min_confidence", 0.5);
  auto algorithm = parse_mining_algorithm(param<std::string>(spec.params, "algo", "fpgrowth"));
  auto itemsets = mine_frequent_itemsets(transactions, min_support, algorithm, &control, threads_param(spec.params));
  auto rules = derive_rules(itemsets, min_confidence, &control);

  auto names = [&](Itemset const& items) {
    std::vector<std::string> out;
    for (auto i : items) out.push_back(transactions.item_name(i));
    return out;
  };
  TaskResult result;
  for (auto const& s : itemsets) {
    result.items.push_back({{{"type", "itemset"}, {"items", names(s.items)}, {"support", s.support}, {"count", s.count}},
                            to_string(s, transactions)});
  }
  for (auto const& r : rules) {
    result.items.push_back({{{"type", "rule"},
                             {"antecedent", names(r.antecedent)},
                             {"consequent", names(r.consequent)},
                             {"support", r.support},
                             {"confidence", r.confidence}},
                            to_string(r, transactions)});
  }
  result.summary = {
      {"transactions", transactions.size()},
      {"items", transactions.item_count()},
      {"itemset_count", itemsets.size()},
      {"rule_count", rules.size()},
      {"min_support", min_support},
      {"min_confidence", min_confidence},
      {"algorithm", algorithm == MiningAlgorithm::kApriori ? "apriori" : "fpgrowth"},
  };
  return result;
}

TaskResult run_profile_stats(TaskSpec const& spec, TaskInputs const& inputs, ExecutionControl& control) {
  auto table = load_table(spec, inputs);
  auto stats = profile_table(*table, &control, threads_param(spec.params));
  TaskResult result;
  for (auto const& s : stats) {
    auto num = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
    json data{
        {"name", s.name},
        {"type", column_type_name(s.type)},
        {"row_count", s.row_count},
        {"null_count", s.null_count},
        {"distinct_count", s.distinct_count},
        {"min", cell_json(s.min)},
        {"max", cell_json(s.max)},
        {"mean", num(s.mean)},
        {"std_dev", num(s.std_dev)},
    };
    std::string text = s.name + ": type=" + std::string(column_type_name(s.type)) +
                       " nulls=" + std::to_string(s.null_count) + " distinct=" + std::to_string(s.distinct_count) +
                       " min=" + cell_text(s.min) + " max=" + cell_text(s.max);
    if (s.mean) text += " mean=" + format_real(*s.mean) + " std=" + format_real(*s.std_dev);
    result.items.push_back({std::move(data), std::move(text)});
  }
  result.summary = {{"rows", table->row_count()}, {"columns", table->column_count()}};
  return result;
}

TaskResult run_typo_pipeline(TaskSpec const& spec, TaskInputs const& inputs, ExecutionControl& control) {
  auto table = load_table(spec, inputs);
  TypoPipelineConfig config;
  config.error_threshold = param(spec.params, "error", config.error_threshold);
  config.max_lhs = param(spec.params, "max_lhs", config.max_lhs);
  config.min_cluster_size = param(spec.params, "min_cluster_size", config.min_cluster_size);
  config.max_clusters_shown = param(spec.params, "max_clusters_shown", config.max_clusters_shown);
  config.thread_count = threads_param(spec.params);
  auto candidates = find_typo_candidates(*table, config, &control);
  TaskResult result;
  for (auto const& c : candidates) {
    json clusters = json::array();
    for (auto const& entry : c.clusters) {
      json rows = json::array();
      for (auto const& r : entry.cluster.rows) {
        bool suspect = std::find(entry.suspect_rows.begin(), entry.suspect_rows.end(), r.row) != entry.suspect_rows.end();
        rows.push_back({{"row", r.row}, {"value", cell_json(r.rhs)}, {"suspect", suspect}});
      }
      clusters.push_back({
          {"lhs_value", cells_json(entry.cluster.lhs_value)},
          {"size", entry.cluster.rows.size()},
          {"majority_rhs", cell_json(entry.cluster.majority_rhs)},
          {"majority_count", entry.cluster.majority_count},
          {"suspicion_score", entry.suspicion_score},
          {"suspect_rows", entry.suspect_rows},
          {"rows", std::move(rows)},
      });
    }
    auto data = fd_json(c.fd, *table);
    data["cluster_count"] = c.clusters.size();
    data["clusters"] = std::move(clusters);
    result.items.push_back({std::move(data), to_string(c.fd, *table)});
  }
  result.summary = {
      {"fd_count", candidates.size()},
      {"error_threshold", config.error_threshold},
      {"max_lhs", config.max_lhs},
      {"min_cluster_size", config.min_cluster_size},
      {"max_clusters_shown", config.max_clusters_shown},
  };
  return result;
}

TaskResult run_apply_fixes(TaskSpec const& spec, TaskInputs const& inputs, ExecutionControl& control) {
  if (!inputs.apply_fixes) throw Error(ErrorCode::kValidationError, "fixes need the dataset registry");
  auto table = load_table(spec, inputs);
  std::vector<FixDecision> decisions;
  for (auto const& d : spec.params.at("decisions")) {
    FixDecision fix;
    fix.row = d.at("row").get<std::size_t>();
    fix.column = resolve_column_param(*table, d.at("column"));
    fix.keep = d.value("keep", false);
    if (d.contains("value") && d.at("value").is_string()) fix.value = d.at("value").get<std::string>();
    decisions.push_back(std::move(fix));
  }
  checkpoint(&control);
  TaskResult result;
  result.summary = {{"dataset", inputs.apply_fixes(spec.dataset_ids.front(), decisions)},
                    {"decision_count", decisions.size()}};
  return result;
}

}  // namespace

std::size_t resolve_column_param(Table const& table, json const& value) {
  if (value.is_number_integer()) {
    auto index = value.get<std::int64_t>();
    if (index < 0 || static_cast<std::size_t>(index) >= table.column_count()) {
      throw Error(ErrorCode::kIndexOutOfRange, "column index " + std::to_string(index) + " out of range");
    }
    return static_cast<std::size_t>(index);
  }
  auto name = value.get<std::string>();
  if (auto found = table.find_column(name)) return *found;
  // Command-line users may give indexes as text.
  if (!name.empty() && name.find_first_not_of("0123456789") == std::string::npos && name.size() < 10) {
    return resolve_column_param(table, json(std::stoll(name)));
  }
  throw Error(ErrorCode::kUnknownColumn, "no column named '" + name + "' in " + table.name());
}

json to_json(TaskResult const& result) {
  json items = json::array();
  for (auto const& item : result.items) items.push_back({{"data", item.data}, {"text", item.text}});
  return {{"summary", result.summary}, {"items", std::move(items)}};
}

TaskResult result_from_json(json const& doc) {
  TaskResult result;
  result.summary = doc.at("summary");
  for (auto const& item : doc.at("items")) {
    result.items.push_back({item.at("data"), item.at("text").get<std::string>()});
  }
  return result;
}

TaskResult execute_task(TaskSpec const& spec, TaskInputs const& inputs, ExecutionControl& control) {
  checkpoint(&control);
  inject_fault(spec.params);
  switch (spec.kind) {
    case TaskKind::kDiscoverFd:
      return run_discover_fd(spec, inputs, control);
    case TaskKind::kValidateFd:
      return run_validate_fd(spec, inputs, control);
    case TaskKind::kValidateMfd:
      return run_validate_mfd(spec, inputs, control);
    case TaskKind::kDiscoverInd:
      return run_discover_ind(spec, inputs, control);
    case TaskKind::kValidateInd:
      return run_validate_ind(spec, inputs, control);
    case TaskKind::kMineRules:
      return run_mine_rules(spec, inputs, control);
    case TaskKind::kProfileStats:
      return run_profile_stats(spec, inputs, control);
    case TaskKind::kTypoPipeline:
      return run_typo_pipeline(spec, inputs, control);
    case TaskKind::kApplyFixes:
      return run_apply_fixes(spec, inputs, control);
  }
  throw Error(ErrorCode::kValidationError, "unhandled task kind");
}

}  // namespace profiler::engine
