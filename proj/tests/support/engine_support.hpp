#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <random>
#include <string>
#include <thread>

#include "profiler/engine/task_manager.hpp"

namespace profiler::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("profiler-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(TempDir const&) = delete;
  TempDir& operator=(TempDir const&) = delete;

  std::filesystem::path const& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string t1_csv() { return "A,B,C\n1,a,x\n1,a,y\n2,b,x\n2,b,x\n"; }

/// Random table wide enough that full FD discovery runs for many seconds,
/// so tests can observe it running and cancel it.
inline std::string slow_fd_csv(std::size_t rows = 3000, std::size_t cols = 24, unsigned seed = 5) {
  std::mt19937 rng(seed);
  std::string out;
  for (std::size_t c = 0; c < cols; ++c) out += (c ? "," : "") + std::string("c") + std::to_string(c);
  out += "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out += (c ? "," : "") + std::to_string(rng() % (3 + c % 5));
    }
    out += "\n";
  }
  return out;
}

inline engine::TaskSpec spec_of(engine::TaskKind kind, std::vector<std::string> datasets, nlohmann::json params) {
  engine::TaskSpec spec;
  spec.kind = kind;
  spec.dataset_ids = std::move(datasets);
  spec.params = std::move(params);
  return spec;
}

/// Polls until `pred(status)` or the timeout; returns the last status.
template <class Pred>
engine::TaskStatus poll_until(engine::TaskManager& tasks, std::string const& id, Pred pred,
                              std::chrono::milliseconds timeout = std::chrono::seconds(30)) {
  auto deadline = std::chrono::steady_clock::now() + timeout;
  auto status = tasks.poll(id);
  while (!pred(status) && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    status = tasks.poll(id);
  }
  return status;
}

}  // namespace profiler::testing
