#include "profiler/engine/task_manager.hpp"

#include <filesystem>
#include <fstream>
#include <new>

#include "profiler/csv.hpp"
#include "profiler/errors.hpp"

namespace profiler::engine {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kTaskPrefix = "task-";

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

TaskManager::TaskManager(EngineConfig const& config, DatasetRegistry& registry)
    : config_(config), registry_(registry) {
  config_.validate();
  fs::create_directories(config_.data_dir / "tasks");
  restore();
  for (unsigned i = 0; i < config_.workers; ++i) {
    workers_.emplace_back([this](std::stop_token stop) { worker_loop(stop); });
  }
}

TaskManager::~TaskManager() { shutdown(); }

void TaskManager::shutdown() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    stopping_ = true;
    for (auto const& [id, record] : tasks_) {
      if (!is_terminal(record->status.state)) record->control->request_cancel();
    }
  }
  for (auto& w : workers_) w.request_stop();
  queue_cv_.notify_all();
  workers_.clear();
}

void TaskManager::restore() {
  for (auto const& item : fs::directory_iterator(config_.data_dir / "tasks")) {
    if (item.path().extension() != ".json") continue;
    json doc;
    try {
      doc = json::parse(read_file(item.path()));
    } catch (std::exception const&) {
      continue;  // torn write from a crash
    }
    auto record = std::make_shared<Record>();
    record->spec = parse_task_spec(doc.at("spec"));
    record->status = status_from_json(doc.at("status"));
    record->control = std::make_shared<ExecutionControl>();
    if (doc.contains("result") && !doc.at("result").is_null()) {
      record->result = std::make_shared<TaskResult const>(result_from_json(doc.at("result")));
    }
    if (!is_terminal(record->status.state)) {
      record->status.state = TaskState::kFailed;
      record->status.error_code.reset();
      record->status.error_message = "engine restarted before the task finished";
      record->status.finished_ms = now_ms();
      persist(*record);
    }
    auto const& id = record->status.id;
    if (id.starts_with(kTaskPrefix)) {
      try {
        next_number_ = std::max<std::uint64_t>(next_number_, std::stoull(id.substr(kTaskPrefix.size())) + 1);
      } catch (std::exception const&) {
      }
    }
    tasks_.emplace(id, std::move(record));
  }
}

void TaskManager::persist(Record const& record) const {
  json doc{{"status", to_json(record.status)}, {"spec", to_json(record.spec)}};
  doc["result"] = record.result ? to_json(*record.result) : json(nullptr);
  auto path = config_.data_dir / "tasks" / (record.status.id + ".json");
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump();
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
}

std::shared_ptr<TaskManager::Record> TaskManager::find(std::string const& id) const {
  auto it = tasks_.find(id);
  if (it == tasks_.end()) throw Error(ErrorCode::kUnknownTask, "unknown task '" + id + "'");
  return it->second;
}

void TaskManager::refresh_progress(Record& record) const {
  if (record.status.state == TaskState::kRunning) {
    record.status.progress = std::max(record.status.progress, std::min(record.control->progress(), 0.99));
    record.status.peak_memory_bytes = record.control->peak_memory();
  }
}

std::string TaskManager::submit(TaskSpec spec) {
  validate_task_spec(spec, config_.allow_fault_injection);
  for (auto const& id : spec.dataset_ids) {
    auto entry = registry_.get(id);
    if (entry.format == DatasetFormat::kTransactions && spec.kind != TaskKind::kMineRules) {
      throw Error(ErrorCode::kValidationError,
                  "dataset '" + id + "' holds transactions; only mine_rules can use it");
    }
  }
  auto record = std::make_shared<Record>();
  record->spec = std::move(spec);
  record->control = std::make_shared<ExecutionControl>();
  record->status.kind = record->spec.kind;
  record->status.submitted_ms = now_ms();
  std::string id;
  {
    std::lock_guard lock(mutex_);
    if (stopping_) throw Error(ErrorCode::kValidationError, "engine is shutting down");
    id = std::string(kTaskPrefix) + std::to_string(next_number_++);
    record->status.id = id;
    tasks_.emplace(id, record);
    persist(*record);
    queue_.push_back(id);
  }
  queue_cv_.notify_one();
  return id;
}

TaskStatus TaskManager::poll(std::string const& id) {
  std::lock_guard lock(mutex_);
  auto record = find(id);
  refresh_progress(*record);
  return record->status;
}

TaskStatus TaskManager::cancel(std::string const& id) {
  std::shared_ptr<Record> record;
  {
    std::lock_guard lock(mutex_);
    record = find(id);
    if (is_terminal(record->status.state)) {
      throw Error(ErrorCode::kAlreadyFinished, "task '" + id + "' already " +
                                                   std::string(task_state_name(record->status.state)));
    }
    record->control->request_cancel();
    if (record->status.state == TaskState::kQueued) {
      std::erase(queue_, id);
      record->status.state = TaskState::kCancelled;
      record->status.error_code = ErrorCode::kCancelled;
      record->status.error_message = "cancelled before it started";
      record->status.finished_ms = now_ms();
      persist(*record);
    }
    refresh_progress(*record);
  }
  done_cv_.notify_all();
  std::lock_guard lock(mutex_);
  return record->status;
}

std::shared_ptr<TaskResult const> TaskManager::full_result(std::string const& id) {
  std::lock_guard lock(mutex_);
  auto record = find(id);
  if (record->status.state != TaskState::kDone) {
    throw Error(ErrorCode::kNotFinished, "task '" + id + "' is " + std::string(task_state_name(record->status.state)));
  }
  return record->result;
}

ResultPage TaskManager::result(std::string const& id, ResultQuery const& query) {
  return make_page(*full_result(id), query);
}

std::vector<TaskStatus> TaskManager::list() {
  std::lock_guard lock(mutex_);
  std::vector<TaskStatus> out;
  for (auto const& [id, record] : tasks_) {
    refresh_progress(*record);
    out.push_back(record->status);
  }
  std::sort(out.begin(), out.end(), [](TaskStatus const& a, TaskStatus const& b) {
    return a.submitted_ms != b.submitted_ms ? a.submitted_ms < b.submitted_ms : a.id < b.id;
  });
  return out;
}

TaskSpec TaskManager::spec(std::string const& id) {
  std::lock_guard lock(mutex_);
  return find(id)->spec;
}

TaskStatus TaskManager::wait(std::string const& id, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  auto record = find(id);
  done_cv_.wait_for(lock, timeout, [&] { return is_terminal(record->status.state); });
  refresh_progress(*record);
  return record->status;
}

void TaskManager::worker_loop(std::stop_token stop) {
  for (;;) {
    std::shared_ptr<Record> record;
    {
      std::unique_lock lock(mutex_);
      queue_cv_.wait(lock, stop, [&] { return !queue_.empty(); });
      if (stop.stop_requested()) return;
      record = tasks_.at(queue_.front());
      queue_.pop_front();
      record->status.state = TaskState::kRunning;
      record->status.started_ms = now_ms();
      persist(*record);
    }
    run(record);
    done_cv_.notify_all();
  }
}

TaskInputs registry_inputs(DatasetRegistry& registry) {
  TaskInputs in;
  in.table = [&registry](std::string const& id, TableOptions const& options) {
    return registry.table(id, options.separator, options.has_header, options.null_mode);
  };
  in.text = [&registry](std::string const& id) { return registry.text(id); };
  in.defaults = [&registry](std::string const& id) {
    auto entry = registry.get(id);
    TableOptions options;
    options.separator = entry.separator;
    options.has_header = entry.has_header;
    return options;
  };
  in.apply_fixes = [&registry](std::string const& id, std::vector<FixDecision> const& decisions) {
    return to_json(registry.apply_fixes(id, decisions));
  };
  return in;
}

void TaskManager::run(std::shared_ptr<Record> const& record) {
  auto& control = *record->control;
  auto const& params = record->spec.params;
  auto time_budget = params.value("time_budget_ms", config_.time_budget_ms);
  auto memory_budget = params.value("memory_budget_mb", config_.memory_budget_mb);
  if (time_budget > 0) control.set_time_budget(std::chrono::milliseconds(time_budget));
  if (memory_budget > 0) control.set_memory_budget(static_cast<std::size_t>(memory_budget) << 20);

  std::shared_ptr<TaskResult const> result;
  std::optional<ErrorCode> code;
  std::optional<std::string> message;
  try {
    result = std::make_shared<TaskResult const>(execute_task(record->spec, registry_inputs(registry_), control));
  } catch (Error const& e) {
    code = e.code();
    message = e.what();
  } catch (std::bad_alloc const&) {
    code = ErrorCode::kResourceLimitExceeded;
    message = "out of memory";
  } catch (std::exception const& e) {
    message = std::string("executor failed: ") + e.what();
  } catch (...) {
    message = "executor failed with an unknown exception";
  }

  std::lock_guard lock(mutex_);
  refresh_progress(*record);
  auto& status = record->status;
  status.finished_ms = now_ms();
  status.peak_memory_bytes = control.peak_memory();
  if (result) {
    status.state = TaskState::kDone;
    status.progress = 1.0;
    record->result = std::move(result);
  } else {
    status.state = code == ErrorCode::kCancelled ? TaskState::kCancelled : TaskState::kFailed;
    status.error_code = code;
    status.error_message = message;
  }
  persist(*record);
}

}  // namespace profiler::engine
