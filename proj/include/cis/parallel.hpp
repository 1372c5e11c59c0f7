#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace cis {

// static round-robin assignment: task i always runs with the same arguments
// regardless of thread count, and tasks must write only to i-specific slots,
// so results are bitwise identical for any n_threads
inline void parallel_for(int count, int n_threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int t_used = std::max(1, std::min(n_threads, count));
  if (t_used == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<bool> stop{false};
  std::vector<std::thread> pool;
  pool.reserve(t_used);
  for (int t = 0; t < t_used; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < count && !stop.load(std::memory_order_relaxed); i += t_used) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          stop.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cis
