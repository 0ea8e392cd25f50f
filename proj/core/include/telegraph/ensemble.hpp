#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "telegraph/random.hpp"

namespace telegraph {

/// Runs fn(index, derive_seed(seed, index)) for index in [0, n) on up to
/// `threads` workers (0 = hardware concurrency). Results are returned in
/// index order, so aggregation does not depend on scheduling.
template <typename Fn>
auto run_ensemble(std::size_t n, std::uint64_t seed, Fn&& fn, unsigned threads = 0)
    -> std::vector<decltype(fn(std::size_t{}, std::uint64_t{}))> {
  using Result = decltype(fn(std::size_t{}, std::uint64_t{}));
  std::vector<Result> results(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = fn(i, derive_seed(seed, i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace telegraph
