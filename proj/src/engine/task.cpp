#include "profiler/engine/task.hpp"

#include <algorithm>
#include <cmath>

namespace profiler::engine {

using nlohmann::json;

namespace {

struct KindName {
  TaskKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {TaskKind::kDiscoverFd, "discover_fd"},       {TaskKind::kValidateFd, "validate_fd"},
    {TaskKind::kValidateMfd, "validate_mfd"},     {TaskKind::kDiscoverInd, "discover_ind"},
    {TaskKind::kValidateInd, "validate_ind"},     {TaskKind::kMineRules, "mine_rules"},
    {TaskKind::kProfileStats, "profile_stats"},   {TaskKind::kTypoPipeline, "typo_pipeline"},
    {TaskKind::kApplyFixes, "apply_fixes"},
};

enum class ParamType {
  kNumber,
  kInteger,
  kBool,
  kChoice,
  kChar,
  kColumn,      // name or index
  kColumnList,  // array of names/indexes, or a single one
  kColumnRef,   // "table.column" or {"dataset": ..., "column": ...}
  kDecisions,
};

struct Bound {
  double value;
  bool open;
};

struct ParamRule {
  std::string_view name;
  ParamType type;
  bool required = false;
  std::optional<Bound> low{};
  std::optional<Bound> high{};
  std::vector<std::string_view> choices{};
};

[[noreturn]] void invalid(std::string const& message) { throw Error(ErrorCode::kValidationError, message); }

std::vector<ParamRule> general_rules(TaskKind kind, bool allow_fault_injection) {
  std::vector<ParamRule> rules{
      {"separator", ParamType::kChar},
      {"has_header", ParamType::kBool},
      {"time_budget_ms", ParamType::kInteger, false, Bound{0, false}},
      {"memory_budget_mb", ParamType::kInteger, false, Bound{0, false}},
  };
  if (allow_fault_injection) {
    rules.push_back({"fault_injection", ParamType::kChoice, false, {}, {}, {"throw", "throw_unknown", "bad_alloc"}});
  }
  if (kind != TaskKind::kMineRules && kind != TaskKind::kApplyFixes) {
    rules.push_back({"null_equal", ParamType::kBool});
  }
  if (kind != TaskKind::kValidateFd && kind != TaskKind::kValidateInd && kind != TaskKind::kApplyFixes) {
    rules.push_back({"threads", ParamType::kInteger, false, Bound{1, false}, Bound{256, false}});
  }
  return rules;
}

std::vector<ParamRule> kind_rules(TaskKind kind) {
  Bound const zero_closed{0, false}, zero_open{0, true}, one_closed{1, false}, one_open{1, true};
  switch (kind) {
    case TaskKind::kDiscoverFd:
      return {
          {"algo", ParamType::kChoice, false, {}, {}, {"tane"}},
          {"error", ParamType::kNumber, false, zero_closed, one_open},
          {"max_lhs", ParamType::kInteger, false, one_closed, Bound{64, false}},
      };
    case TaskKind::kValidateFd:
      return {
          {"lhs", ParamType::kColumnList, true},
          {"rhs", ParamType::kColumn, true},
          {"error", ParamType::kNumber, false, zero_closed, one_open},
      };
    case TaskKind::kValidateMfd:
      return {
          {"lhs", ParamType::kColumnList, true},
          {"rhs", ParamType::kColumnList, true},
          {"metric", ParamType::kChoice, true, {}, {}, {"absolute-difference", "abs", "euclidean", "levenshtein"}},
          {"delta", ParamType::kNumber, true, zero_closed},
          {"sort", ParamType::kChoice, false, {}, {}, {"distance", "index", "outliers"}},
      };
    case TaskKind::kDiscoverInd:
      return {{"spill_threshold", ParamType::kInteger, false, one_closed}};
    case TaskKind::kValidateInd:
      return {
          {"dependent", ParamType::kColumnRef, true},
          {"referenced", ParamType::kColumnRef, true},
          {"max_missing", ParamType::kInteger, false, zero_closed, Bound{10000, false}},
      };
    case TaskKind::kMineRules:
      return {
          {"min_support", ParamType::kNumber, true, zero_open, one_closed},
          {"min_confidence", ParamType::kNumber, false, zero_open, one_closed},
          {"algo", ParamType::kChoice, false, {}, {}, {"apriori", "fpgrowth", "fp-growth"}},
          {"input_format", ParamType::kChoice, false, {}, {}, {"singular", "tabular"}},
      };
    case TaskKind::kProfileStats:
      return {};
    case TaskKind::kTypoPipeline:
      return {
          {"error", ParamType::kNumber, false, zero_open, one_open},
          {"max_lhs", ParamType::kInteger, false, one_closed, Bound{64, false}},
          {"min_cluster_size", ParamType::kInteger, false, Bound{2, false}},
          {"max_clusters_shown", ParamType::kInteger, false, one_closed},
      };
    case TaskKind::kApplyFixes:
      return {{"decisions", ParamType::kDecisions, true}};
  }
  return {};
}

std::string format_bound(double value) {
  auto text = std::to_string(value);
  text.erase(text.find_last_not_of('0') + 1);
  if (text.back() == '.') text.pop_back();
  return text;
}

std::string range_text(ParamRule const& rule) {
  std::string out = rule.low ? (rule.low->open ? "(" : "[") + format_bound(rule.low->value) : "(-inf";
  out += ", ";
  out += rule.high ? format_bound(rule.high->value) + (rule.high->open ? ")" : "]") : "inf)";
  return out;
}

bool is_column(json const& v) { return v.is_string() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); }

void check_value(ParamRule const& rule, json const& v) {
  std::string const name(rule.name);
  switch (rule.type) {
    case ParamType::kNumber:
    case ParamType::kInteger: {
      if (rule.type == ParamType::kInteger ? !v.is_number_integer() : !v.is_number()) {
        invalid("parameter '" + name + "' must be " + (rule.type == ParamType::kInteger ? "an integer" : "a number"));
      }
      auto x = v.get<double>();
      bool ok = std::isfinite(x);
      if (rule.low) ok = ok && (rule.low->open ? x > rule.low->value : x >= rule.low->value);
      if (rule.high) ok = ok && (rule.high->open ? x < rule.high->value : x <= rule.high->value);
      if (!ok) invalid("parameter '" + name + "' must lie in " + range_text(rule));
      return;
    }
    case ParamType::kBool:
      if (!v.is_boolean()) invalid("parameter '" + name + "' must be a boolean");
      return;
    case ParamType::kChoice: {
      if (!v.is_string()) invalid("parameter '" + name + "' must be a string");
      auto s = v.get<std::string>();
      if (std::find(rule.choices.begin(), rule.choices.end(), s) == rule.choices.end()) {
        std::string allowed;
        for (auto c : rule.choices) allowed += (allowed.empty() ? "" : ", ") + std::string(c);
        invalid("parameter '" + name + "' must be one of: " + allowed);
      }
      return;
    }
    case ParamType::kChar:
      if (!v.is_string() || v.get<std::string>().size() != 1) {
        invalid("parameter '" + name + "' must be a single character");
      }
      return;
    case ParamType::kColumn:
      if (!is_column(v)) invalid("parameter '" + name + "' must be a column name or index");
      return;
    case ParamType::kColumnList:
      if (is_column(v)) return;
      if (!v.is_array()) invalid("parameter '" + name + "' must be a list of column names or indexes");
      for (auto const& item : v) {
        if (!is_column(item)) invalid("parameter '" + name + "' must be a list of column names or indexes");
      }
      return;
    case ParamType::kColumnRef:
      if (v.is_string() && v.get<std::string>().find('.') != std::string::npos) return;
      if (v.is_object() && v.contains("dataset") && v.at("dataset").is_string() && v.contains("column") &&
          is_column(v.at("column")) && v.size() == 2) {
        return;
      }
      invalid("parameter '" + name + "' must be \"table.column\" or {\"dataset\": id, \"column\": name}");
    case ParamType::kDecisions:
      if (!v.is_array()) invalid("parameter 'decisions' must be an array");
      for (auto const& d : v) {
        if (!d.is_object() || !d.contains("row") || !d.at("row").is_number_integer() ||
            d.at("row").get<std::int64_t>() < 0 || !d.contains("column") || !is_column(d.at("column"))) {
          invalid("each decision needs a non-negative integer 'row' and a 'column'");
        }
        for (auto const& [key, value] : d.items()) {
          if (key == "keep" && !value.is_boolean()) invalid("decision 'keep' must be a boolean");
          if (key == "value" && !value.is_string() && !value.is_null()) {
            invalid("decision 'value' must be a string or null");
          }
          if (key != "row" && key != "column" && key != "keep" && key != "value") {
            invalid("unknown decision field '" + key + "'");
          }
        }
        bool keep = d.value("keep", false);
        if (!keep && !d.contains("value")) invalid("a decision without keep=true needs a 'value'");
      }
      return;
  }
}

}  // namespace

TaskKind parse_task_kind(std::string_view name) {
  for (auto const& k : kKindNames) {
    if (k.name == name) return k.kind;
  }
  throw Error(ErrorCode::kValidationError, "unknown task kind '" + std::string(name) + "'");
}

std::string_view task_kind_name(TaskKind kind) noexcept {
  for (auto const& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "discover_fd";
}

std::vector<TaskKind> all_task_kinds() {
  std::vector<TaskKind> out;
  for (auto const& k : kKindNames) out.push_back(k.kind);
  return out;
}

TaskSpec parse_task_spec(json const& body) {
  if (!body.is_object()) invalid("task spec must be a JSON object");
  TaskSpec spec;
  auto const* kind = body.contains("kind") ? &body.at("kind") : body.contains("task_kind") ? &body.at("task_kind") : nullptr;
  if (kind == nullptr || !kind->is_string()) invalid("task spec needs a string 'kind'");
  spec.kind = parse_task_kind(kind->get<std::string>());
  auto const* datasets = body.contains("datasets")      ? &body.at("datasets")
                         : body.contains("dataset_ids") ? &body.at("dataset_ids")
                                                        : nullptr;
  if (datasets == nullptr) invalid("task spec needs 'datasets'");
  if (datasets->is_string()) {
    spec.dataset_ids.push_back(datasets->get<std::string>());
  } else if (datasets->is_array()) {
    for (auto const& d : *datasets) {
      if (!d.is_string()) invalid("dataset ids must be strings");
      spec.dataset_ids.push_back(d.get<std::string>());
    }
  } else {
    invalid("'datasets' must be a string or an array of strings");
  }
  if (body.contains("params")) {
    if (!body.at("params").is_object()) invalid("'params' must be an object");
    spec.params = body.at("params");
  }
  for (auto const& [key, value] : body.items()) {
    if (key != "kind" && key != "task_kind" && key != "datasets" && key != "dataset_ids" && key != "params") {
      invalid("unknown task spec field '" + key + "'");
    }
  }
  return spec;
}

json to_json(TaskSpec const& spec) {
  return {{"kind", task_kind_name(spec.kind)}, {"datasets", spec.dataset_ids}, {"params", spec.params}};
}

std::vector<std::string> accepted_params(TaskKind kind, bool allow_fault_injection) {
  std::vector<std::string> out;
  for (auto const& r : general_rules(kind, allow_fault_injection)) out.emplace_back(r.name);
  for (auto const& r : kind_rules(kind)) out.emplace_back(r.name);
  return out;
}

void validate_task_spec(TaskSpec const& spec, bool allow_fault_injection) {
  auto rules = general_rules(spec.kind, allow_fault_injection);
  auto specific = kind_rules(spec.kind);
  rules.insert(rules.end(), specific.begin(), specific.end());

  if (!spec.params.is_object()) invalid("'params' must be an object");
  for (auto const& [key, value] : spec.params.items()) {
    auto it = std::find_if(rules.begin(), rules.end(), [&](ParamRule const& r) { return r.name == key; });
    if (it == rules.end()) {
      invalid("unknown parameter '" + key + "' for " + std::string(task_kind_name(spec.kind)));
    }
    check_value(*it, value);
  }
  for (auto const& r : rules) {
    if (r.required && !spec.params.contains(std::string(r.name))) {
      invalid("missing parameter '" + std::string(r.name) + "' for " + std::string(task_kind_name(spec.kind)));
    }
  }

  bool multi = spec.kind == TaskKind::kDiscoverInd || spec.kind == TaskKind::kValidateInd;
  if (spec.dataset_ids.empty()) invalid("at least one dataset is required");
  if (!multi && spec.dataset_ids.size() != 1) {
    invalid(std::string(task_kind_name(spec.kind)) + " takes exactly one dataset");
  }
}

std::string_view task_state_name(TaskState state) noexcept {
  switch (state) {
    case TaskState::kQueued:
      return "queued";
    case TaskState::kRunning:
      return "running";
    case TaskState::kDone:
      return "done";
    case TaskState::kFailed:
      return "failed";
    case TaskState::kCancelled:
      return "cancelled";
  }
  return "queued";
}

TaskState parse_task_state(std::string_view name) {
  for (auto s : {TaskState::kQueued, TaskState::kRunning, TaskState::kDone, TaskState::kFailed, TaskState::kCancelled}) {
    if (task_state_name(s) == name) return s;
  }
  invalid("unknown task state '" + std::string(name) + "'");
}

bool is_terminal(TaskState state) noexcept {
  return state == TaskState::kDone || state == TaskState::kFailed || state == TaskState::kCancelled;
}

json to_json(TaskStatus const& status) {
  json out{
      {"id", status.id},
      {"kind", task_kind_name(status.kind)},
      {"state", task_state_name(status.state)},
      {"progress", status.progress},
      {"submitted_ms", status.submitted_ms},
      {"started_ms", status.started_ms ? json(*status.started_ms) : json(nullptr)},
      {"finished_ms", status.finished_ms ? json(*status.finished_ms) : json(nullptr)},
      {"peak_memory_bytes", status.peak_memory_bytes},
  };
  out["error"] = status.error_message
                     ? json{{"code", status.error_code ? error_code_name(*status.error_code) : "Internal"},
                            {"message", *status.error_message}}
                     : json(nullptr);
  if (status.started_ms) {
    auto end = status.finished_ms.value_or(*status.started_ms);
    out["elapsed_ms"] = end - *status.started_ms;
  }
  return out;
}

TaskStatus status_from_json(json const& doc) {
  TaskStatus status;
  status.id = doc.at("id").get<std::string>();
  status.kind = parse_task_kind(doc.at("kind").get<std::string>());
  status.state = parse_task_state(doc.at("state").get<std::string>());
  status.progress = doc.at("progress").get<double>();
  status.submitted_ms = doc.at("submitted_ms").get<std::int64_t>();
  if (!doc.at("started_ms").is_null()) status.started_ms = doc.at("started_ms").get<std::int64_t>();
  if (!doc.at("finished_ms").is_null()) status.finished_ms = doc.at("finished_ms").get<std::int64_t>();
  status.peak_memory_bytes = doc.value("peak_memory_bytes", std::size_t{0});
  if (doc.contains("error") && !doc.at("error").is_null()) {
    auto code = doc.at("error").at("code").get<std::string>();
    for (int c = 0; c <= static_cast<int>(ErrorCode::kImmutableDataset); ++c) {
      if (error_code_name(static_cast<ErrorCode>(c)) == code) status.error_code = static_cast<ErrorCode>(c);
    }
    status.error_message = doc.at("error").at("message").get<std::string>();
  }
  return status;
}

}  // namespace profiler::engine
