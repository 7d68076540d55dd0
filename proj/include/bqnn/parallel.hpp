/* Copyright 2026 The bqnn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BQNN_PARALLEL_HPP_
#define BQNN_PARALLEL_HPP_

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bqnn {

// Number of workers to use when the caller asks for `requested` (0 = all cores).
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [0, n) into contiguous blocks and calls body(begin, end) for each on
// its own thread. Every index is visited by exactly one call.
template <typename Body>
void parallel_for(std::int64_t n, int threads, Body&& body) {
  const std::int64_t workers = std::min<std::int64_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    if (n > 0) body(std::int64_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::int64_t t = 0; t < workers; ++t) {
    const std::int64_t begin = n * t / workers;
    const std::int64_t end = n * (t + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace bqnn

#endif  // BQNN_PARALLEL_HPP_
