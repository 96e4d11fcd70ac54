#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ek {

inline unsigned hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

/// Evaluates fn(i) for i in [0, n_tasks) on up to `threads` workers and
/// returns the results in task order. The first exception (by task index)
/// is rethrown after all workers join.
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t n_tasks, unsigned threads, Fn&& fn) {
  std::vector<Result> results(n_tasks);
  std::vector<std::exception_ptr> errors(n_tasks);
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n_tasks));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n_tasks;) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace ek
