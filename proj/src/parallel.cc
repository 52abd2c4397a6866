/* Copyright 2026 The IdleNet Authors. All Rights Reserved.

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

#include "idlenet/parallel.h"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace idlenet {
namespace {

std::atomic<int> g_num_threads{1};

}  // namespace

void SetNumThreads(int threads) { g_num_threads = std::max(1, threads); }

int NumThreads() { return g_num_threads.load(); }

void ParallelFor(int64_t count, const std::function<void(int64_t)>& fn) {
  const int64_t threads = std::min<int64_t>(NumThreads(), count);
  if (threads <= 1) {
    for (int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  // Static contiguous partition; each index belongs to one worker.
  std::vector<std::jthread> workers;
  workers.reserve(static_cast<size_t>(threads));
  for (int64_t t = 0; t < threads; ++t) {
    const int64_t begin = count * t / threads;
    const int64_t end = count * (t + 1) / threads;
    workers.emplace_back([begin, end, &fn] {
      for (int64_t i = begin; i < end; ++i) fn(i);
    });
  }
}

}  // namespace idlenet
