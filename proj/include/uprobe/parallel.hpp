// Copyright 2026 The uprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UPROBE_PARALLEL_HPP_
#define UPROBE_PARALLEL_HPP_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace uprobe {

// Process-wide worker cap; 1 means run inline. Set once by the CLI.
void SetMaxThreads(int n);
int MaxThreads();

// Runs fn(chunk_index, begin, end) over `chunks` contiguous slices of
// [0, n). The slicing depends only on `n` and `chunks`, never on the
// thread count, so callers that reduce per-chunk results in chunk order
// get bitwise-identical output for any worker cap.
template <typename Fn>
void ForEachChunk(std::size_t n, std::size_t chunks, Fn&& fn) {
  chunks = std::max<std::size_t>(1, std::min(chunks, n));
  if (n == 0) return;
  auto bounds = [&](std::size_t c) { return c * n / chunks; };
  const std::size_t workers =
      std::min<std::size_t>(chunks, static_cast<std::size_t>(MaxThreads()));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c, bounds(c), bounds(c + 1));
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers) {
        try {
          fn(c, bounds(c), bounds(c + 1));
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Index-parallel map; results land in slot i regardless of scheduling.
template <typename Fn>
void ParallelFor(std::size_t n, Fn&& fn) {
  ForEachChunk(n, 64, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace uprobe

#endif  // UPROBE_PARALLEL_HPP_
