#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>

namespace profiler {

/// Cooperative control block shared between a running algorithm and its owner.
///
/// Algorithms call checkpoint() at phase boundaries and inside long loops; it
/// throws Error{kCancelled} after request_cancel() and
/// Error{kResourceLimitExceeded} once the deadline has passed. Memory is
/// accounted at major data-structure boundaries only, so the budget is a soft
/// limit. All members are safe to call from several threads at once.
class ExecutionControl {
 public:
  using Clock = std::chrono::steady_clock;

  ExecutionControl() = default;
  ExecutionControl(ExecutionControl const&) = delete;
  ExecutionControl& operator=(ExecutionControl const&) = delete;

  void request_cancel() noexcept { cancelled_.store(true, std::memory_order_relaxed); }
  bool cancel_requested() const noexcept { return cancelled_.load(std::memory_order_relaxed); }

  void set_deadline(Clock::time_point deadline) noexcept;
  void set_time_budget(std::chrono::milliseconds budget) noexcept { set_deadline(Clock::now() + budget); }
  void set_memory_budget(std::size_t bytes) noexcept { memory_budget_.store(bytes); }

  void checkpoint() const;

  /// Adds (or with a negative delta releases) accounted bytes. Throws when the
  /// budget is exceeded.
  void charge_memory(std::int64_t bytes);
  std::size_t peak_memory() const noexcept { return peak_memory_.load(); }

  /// Progress never decreases; smaller values are ignored.
  void report_progress(double fraction) noexcept;
  double progress() const noexcept { return progress_.load(); }

 private:
  std::atomic<bool> cancelled_{false};
  std::atomic<std::int64_t> deadline_ns_{0};  // 0 means none
  std::atomic<std::size_t> memory_budget_{0};  // 0 means unlimited
  std::atomic<std::int64_t> memory_used_{0};
  std::atomic<std::size_t> peak_memory_{0};
  std::atomic<double> progress_{0.0};
};

// Null-tolerant helpers so algorithms can take an optional control pointer.
inline void checkpoint(ExecutionControl const* control) {
  if (control != nullptr) control->checkpoint();
}
inline void report_progress(ExecutionControl* control, double fraction) noexcept {
  if (control != nullptr) control->report_progress(fraction);
}
inline void charge_memory(ExecutionControl* control, std::int64_t bytes) {
  if (control != nullptr) control->charge_memory(bytes);
}

}  // namespace profiler
