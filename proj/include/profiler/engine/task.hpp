#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "profiler/errors.hpp"

namespace profiler::engine {

enum class TaskKind {
  kDiscoverFd,
  kValidateFd,
  kValidateMfd,
  kDiscoverInd,
  kValidateInd,
  kMineRules,
  kProfileStats,
  kTypoPipeline,
  kApplyFixes,
};

TaskKind parse_task_kind(std::string_view name);  // ValidationError
std::string_view task_kind_name(TaskKind kind) noexcept;
std::vector<TaskKind> all_task_kinds();

struct TaskSpec {
  TaskKind kind = TaskKind::kDiscoverFd;
  std::vector<std::string> dataset_ids;
  nlohmann::json params = nlohmann::json::object();
};

/// {"kind": "...", "datasets": ["id", ...], "params": {...}}; "task_kind" and
/// "dataset_ids" are accepted as aliases. Throws ValidationError.
TaskSpec parse_task_spec(nlohmann::json const& body);
nlohmann::json to_json(TaskSpec const& spec);

/// Checks every parameter against the kind's schema: names, types, ranges and
/// dataset count. Unknown parameters are rejected. Throws ValidationError.
void validate_task_spec(TaskSpec const& spec, bool allow_fault_injection);

/// Parameter names accepted for a kind, general ones included.
std::vector<std::string> accepted_params(TaskKind kind, bool allow_fault_injection);

enum class TaskState { kQueued, kRunning, kDone, kFailed, kCancelled };

std::string_view task_state_name(TaskState state) noexcept;
TaskState parse_task_state(std::string_view name);
bool is_terminal(TaskState state) noexcept;

struct TaskStatus {
  std::string id;
  TaskKind kind = TaskKind::kDiscoverFd;
  TaskState state = TaskState::kQueued;
  double progress = 0.0;
  std::optional<ErrorCode> error_code;
  std::optional<std::string> error_message;
  std::int64_t submitted_ms = 0;  // unix epoch
  std::optional<std::int64_t> started_ms;
  std::optional<std::int64_t> finished_ms;
  std::size_t peak_memory_bytes = 0;
};

nlohmann::json to_json(TaskStatus const& status);
TaskStatus status_from_json(nlohmann::json const& doc);

}  // namespace profiler::engine
