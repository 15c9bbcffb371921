#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace neraug {

/// Runs fn(i) for i in [0, n) on at most `max_in_flight` threads. fn must not
/// throw; callers capture per-item errors themselves.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t max_in_flight, Fn&& fn) {
  const std::size_t workers = std::min(n, std::max<std::size_t>(1, max_in_flight));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}

}  // namespace neraug
