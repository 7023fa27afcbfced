#pragma once

#include <cstddef>
#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace splinesde {

/// Runs body(i) for i in [0, n) on up to `threads` workers using contiguous
/// blocks. Results must be written to per-index slots; if several indices
/// throw, the exception of the lowest index is rethrown.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> failed_at(workers, n);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        for (std::size_t i = begin; i < end; ++i) {
          try {
            body(i);
          } catch (...) {
            errors[w] = std::current_exception();
            failed_at[w] = i;
            return;
          }
        }
      });
    }
  }
  std::size_t best = workers;
  for (std::size_t w = 0; w < workers; ++w)
    if (errors[w] && (best == workers || failed_at[w] < failed_at[best])) best = w;
  if (best != workers) std::rethrow_exception(errors[best]);
}

}  // namespace splinesde
