#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "profiler/engine/config.hpp"
#include "profiler/engine/executors.hpp"
#include "profiler/engine/registry.hpp"
#include "profiler/engine/results.hpp"
#include "profiler/engine/task.hpp"
#include "profiler/execution.hpp"

namespace profiler::engine {

/// FIFO task queue drained by config.workers threads. Every task runs with
/// its own ExecutionControl; whatever an executor throws ends that task only.
/// Task records (status, spec, result) are written to data_dir/tasks so that
/// results survive a restart; tasks that were queued or running when the
/// process stopped come back as failed.
class TaskManager {
 public:
  TaskManager(EngineConfig const& config, DatasetRegistry& registry);
  ~TaskManager();
  TaskManager(TaskManager const&) = delete;
  TaskManager& operator=(TaskManager const&) = delete;

  /// ValidationError for a bad spec, UnknownDataset for a missing dataset.
  std::string submit(TaskSpec spec);
  TaskStatus poll(std::string const& id);                       // UnknownTask
  TaskStatus cancel(std::string const& id);                     // UnknownTask, AlreadyFinished
  ResultPage result(std::string const& id, ResultQuery const& query);  // UnknownTask, NotFinished, BadRegex
  std::shared_ptr<TaskResult const> full_result(std::string const& id);
  std::vector<TaskStatus> list();
  TaskSpec spec(std::string const& id);

  /// Blocks until the task reaches a terminal state or the timeout passes;
  /// returns the latest status either way.
  TaskStatus wait(std::string const& id, std::chrono::milliseconds timeout);

  /// Cancels everything still pending or running and joins the workers.
  void shutdown();

 private:
  struct Record {
    TaskSpec spec;
    TaskStatus status;
    std::shared_ptr<ExecutionControl> control;
    std::shared_ptr<TaskResult const> result;
  };

  void worker_loop(std::stop_token stop);
  void run(std::shared_ptr<Record> const& record);
  void persist(Record const& record) const;
  void restore();
  std::shared_ptr<Record> find(std::string const& id) const;
  void refresh_progress(Record& record) const;

  EngineConfig config_;
  DatasetRegistry& registry_;
  mutable std::mutex mutex_;
  std::condition_variable_any queue_cv_;
  std::condition_variable_any done_cv_;
  std::map<std::string, std::shared_ptr<Record>> tasks_;
  std::deque<std::string> queue_;
  std::uint64_t next_number_ = 1;
  bool stopping_ = false;
  std::vector<std::jthread> workers_;
};

/// Executor inputs backed by the registry: tables parsed with the upload's
/// separator/header unless the task overrides them, fixes become revisions.
TaskInputs registry_inputs(DatasetRegistry& registry);

/// Registry plus task manager over one configuration.
class Engine {
 public:
  explicit Engine(EngineConfig const& config) : config_(config), registry_(config_), tasks_(config_, registry_) {}

  EngineConfig const& config() const noexcept { return config_; }
  DatasetRegistry& registry() noexcept { return registry_; }
  TaskManager& tasks() noexcept { return tasks_; }

 private:
  EngineConfig config_;
  DatasetRegistry registry_;
  TaskManager tasks_;
};

}  // namespace profiler::engine
