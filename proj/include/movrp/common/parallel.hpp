#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace movrp {

// MOVRP_WORKERS if set (must be a positive integer), else the hardware
// concurrency.
std::size_t default_workers();

// Calls f(i) for i in [0, n) on up to `workers` threads. Items are handed out
// in contiguous blocks by index, so results written to slot i do not depend on
// the worker count. The exception of the lowest failing index is rethrown.
template <class F>
void parallel_for(std::size_t n, std::size_t workers, F&& f) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  if (workers > n) workers = n;
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = n * w / workers, end = n * (w + 1) / workers;
      for (std::size_t i = begin; i < end; ++i) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace movrp
