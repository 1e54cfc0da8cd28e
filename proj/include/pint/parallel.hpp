#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pint {

/// Runs body(begin, end) over a static partition of [0, count) using up to
/// `workers` threads. The partition depends only on (workers, count), so
/// results gathered by index are reproducible. The first exception thrown by
/// any chunk is rethrown on the calling thread.
template <typename Body>
void parallel_chunks(int workers, std::size_t count, Body&& body) {
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(workers, count));
  if (w <= 1) {
    if (count > 0) body(std::size_t{0}, count);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(w);
  const std::size_t base = count / w;
  const std::size_t extra = count % w;
  std::size_t begin = 0;
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t end = begin + base + (t < extra ? 1 : 0);
    threads.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace pint
