#include "profiler/execution.hpp"

#include <string>

#include "profiler/errors.hpp"

namespace profiler {

void ExecutionControl::set_deadline(Clock::time_point deadline) noexcept {
  auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(deadline.time_since_epoch()).count();
  deadline_ns_.store(ns == 0 ? 1 : ns);
}

void ExecutionControl::checkpoint() const {
  if (cancelled_.load(std::memory_order_relaxed)) {
    throw Error(ErrorCode::kCancelled, "task cancelled");
  }
  auto deadline = deadline_ns_.load(std::memory_order_relaxed);
  if (deadline != 0) {
    auto now = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now().time_since_epoch()).count();
    if (now > deadline) {
      throw Error(ErrorCode::kResourceLimitExceeded, "time budget exceeded");
    }
  }
}

void ExecutionControl::charge_memory(std::int64_t bytes) {
  auto used = memory_used_.fetch_add(bytes) + bytes;
  if (used < 0) return;
  auto as_size = static_cast<std::size_t>(used);
  auto peak = peak_memory_.load();
  while (as_size > peak && !peak_memory_.compare_exchange_weak(peak, as_size)) {
  }
  auto budget = memory_budget_.load();
  if (budget != 0 && as_size > budget) {
    throw Error(ErrorCode::kResourceLimitExceeded,
                "memory budget exceeded (" + std::to_string(as_size) + " > " + std::to_string(budget) + " bytes)");
  }
}

void ExecutionControl::report_progress(double fraction) noexcept {
  if (fraction > 1.0) fraction = 1.0;
  auto current = progress_.load();
  while (fraction > current && !progress_.compare_exchange_weak(current, fraction)) {
  }
}

}  // namespace profiler
