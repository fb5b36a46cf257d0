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

#include "uprobe/parallel.hpp"

#include <atomic>

namespace uprobe {
namespace {
std::atomic<int> g_max_threads{1};
}  // namespace

void SetMaxThreads(int n) { g_max_threads.store(n < 1 ? 1 : n); }
int MaxThreads() { return g_max_threads.load(); }

}  // namespace uprobe
