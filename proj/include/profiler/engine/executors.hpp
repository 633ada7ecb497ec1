#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "profiler/engine/task.hpp"
#include "profiler/execution.hpp"
#include "profiler/table.hpp"
#include "profiler/typo.hpp"

namespace profiler::engine {

/// One primitive instance: structured form plus the one-line rendering that
/// regex filters run against.
struct ResultItem {
  nlohmann::json data;
  std::string text;
};

struct TaskResult {
  nlohmann::json summary = nlohmann::json::object();
  std::vector<ResultItem> items;
};

nlohmann::json to_json(TaskResult const& result);
TaskResult result_from_json(nlohmann::json const& doc);

/// Where executors get their inputs. The engine backs this with the dataset
/// registry, the CLI with local files.
struct TaskInputs {
  std::function<std::shared_ptr<Table const>(std::string const& dataset, TableOptions const& options)> table;
  std::function<std::string(std::string const& dataset)> text;
  std::function<nlohmann::json(std::string const& dataset, std::vector<FixDecision> const& decisions)> apply_fixes;
  /// Default parse options of a dataset (upload-time separator and header).
  std::function<TableOptions(std::string const& dataset)> defaults;
};

/// Runs a validated spec. Progress, cancellation and budgets go through
/// `control`; errors propagate as profiler::Error.
TaskResult execute_task(TaskSpec const& spec, TaskInputs const& inputs, ExecutionControl& control);

/// Resolves a column given by name or index.
std::size_t resolve_column_param(Table const& table, nlohmann::json const& value);

}  // namespace profiler::engine
