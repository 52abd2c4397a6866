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

// Central-difference gradient checks against the reverse-mode Backward.
//
// Loss is the sum of squared outputs, so the output cotangent is 2y. For each
// tensor (the input and every parameter) a keyed random subset of entries is
// perturbed by +-eps; the difference quotient is accumulated per output
// element and compared with the analytic gradient using
//   |analytic - numeric| / max(|analytic|, |numeric|, denominator_floor).

#ifndef IDLENET_GRADCHECK_H_
#define IDLENET_GRADCHECK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "idlenet/block.h"
#include "idlenet/graph.h"
#include "idlenet/network.h"

namespace idlenet {

inline constexpr double kOpGradTolerance = 1e-6;
inline constexpr double kBlockGradTolerance = 1e-5;

struct GradCheckOptions {
  uint64_t seed = 0;
  double eps = 1e-5;
  double tolerance = kBlockGradTolerance;
  // Entries sampled per tensor; tensors this small or smaller are checked
  // exhaustively.
  int64_t samples = 8;
  // Keeps exactly-zero analytic gradients (dead ReLUs, unused idle weights)
  // from turning round-off in the numeric estimate into relative error 1.
  double denominator_floor = 1e-3;
};

struct TensorCheck {
  std::string name;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  int64_t checked_entries = 0;
  // Sampled entries whose +-eps evaluation crossed an activation breakpoint;
  // the difference quotient is meaningless there, so another entry is drawn.
  int64_t skipped_at_kink = 0;
};

struct GradCheckReport {
  std::string subject;
  double tolerance = 0.0;
  std::vector<TensorCheck> tensors;

  double max_rel_err() const;
  bool pass() const { return max_rel_err() < tolerance; }
  std::string ToString() const;
};

// The input tensor x is checked too (reported as "input").
GradCheckReport GradCheckGraph(const Graph& graph, const Tensor4& x,
                               const GradCheckOptions& opts,
                               const std::string& subject = "graph");
// Random input of the given shape drawn from opts.seed.
GradCheckReport GradCheckBlock(const Block& block, const Shape4& input,
                               const GradCheckOptions& opts);
GradCheckReport GradCheckNetwork(const Network& net, const Shape4& input,
                                 const GradCheckOptions& opts);

// One single-op graph per op variant (conv: dense/grouped/depthwise/strided;
// every activation; split, concat, shuffle, add, affine, pool, dense, gate),
// each checked at kOpGradTolerance.
std::vector<GradCheckReport> GradCheckAllOps(uint64_t seed = 0);
// One block of every kind, checked at kBlockGradTolerance.
std::vector<GradCheckReport> GradCheckAllBlocks(uint64_t seed = 0);

}  // namespace idlenet

#endif  // IDLENET_GRADCHECK_H_
