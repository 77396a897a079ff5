#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace nillab {

/// Splits [0, n) into fixed chunks of `chunk` items and evaluates
/// `fn(begin, end)` for each. Results come back in chunk order, so any
/// reduction over them is independent of the number of worker threads.
template <typename Result, typename Fn>
std::vector<Result> map_chunks(std::size_t n, std::size_t chunk, Fn&& fn) {
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<Result> results(n_chunks);
  if (n_chunks == 0) return results;

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min<std::size_t>(hw, n_chunks);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * chunk;
    results[c] = fn(begin, std::min(n, begin + chunk));
  };
  if (n_workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      for (std::size_t c = next++; c < n_chunks; c = next++) run_chunk(c);
    });
  }
  workers.clear();  // join before results is moved out
  return results;
}

}  // namespace nillab
