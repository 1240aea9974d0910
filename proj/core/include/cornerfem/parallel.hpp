#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cornerfem {

/// Calls fn(i) for i in [0, count) on up to `workers` threads, each thread
/// owning one contiguous block. The first exception thrown (lowest block)
/// is rethrown after all threads join.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  const auto blocks = static_cast<std::size_t>(std::max(1, workers));
  if (blocks == 1 || count < 2 * blocks) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(blocks);
  {
    std::vector<std::jthread> threads;
    threads.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t begin = count * b / blocks;
      const std::size_t end = count * (b + 1) / blocks;
      threads.emplace_back([&, b, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) fn(i);
        } catch (...) {
          errors[b] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cornerfem
