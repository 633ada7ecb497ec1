#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace profiler::engine {

struct EngineConfig {
  std::filesystem::path data_dir = "profiler-data";
  /// Directory of read-only CSV files registered as built-in datasets.
  std::optional<std::filesystem::path> builtin_dir;
  /// Static files (the web UI bundle) served under "/" when set.
  std::optional<std::filesystem::path> static_dir;
  unsigned workers = 2;
  /// Defaults applied to tasks that do not set their own; 0 means unlimited.
  std::int64_t time_budget_ms = 0;
  std::int64_t memory_budget_mb = 0;
  /// Total bytes of uploaded data and revisions; 0 means unlimited.
  std::uint64_t max_storage_bytes = 0;
  std::size_t snippet_rows = 10;
  /// Accept the `fault_injection` task parameter (tests only).
  bool allow_fault_injection = false;
  std::string host = "127.0.0.1";
  int port = 8080;

  void validate() const;
};

/// Reads a JSON config file (every key optional, names as in EngineConfig)
/// and applies PROFILER_DATA_DIR, PROFILER_WORKERS, PROFILER_TIME_BUDGET_MS,
/// PROFILER_MEMORY_BUDGET_MB and PROFILER_PORT on top. Without a file only
/// the environment is consulted.
EngineConfig load_engine_config(std::optional<std::filesystem::path> const& file);

void apply_environment(EngineConfig& config);

}  // namespace profiler::engine
