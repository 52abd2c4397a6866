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

#ifndef IDLENET_PARALLEL_H_
#define IDLENET_PARALLEL_H_

#include <cstdint>
#include <functional>

namespace idlenet {

// Process-wide intra-op thread count (default 1).
void SetNumThreads(int threads);
int NumThreads();

// Runs fn(i) for i in [0, count). Work items must write disjoint outputs;
// each item is executed by exactly one thread, so per-item arithmetic order
// does not depend on the thread count.
void ParallelFor(int64_t count, const std::function<void(int64_t)>& fn);

}  // namespace idlenet

#endif  // IDLENET_PARALLEL_H_
