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

// Per-channel receptive-field propagation and an empirical probe.
//
// Propagation is additive: a k x k conv with stride s maps (rf, jump) to
// (rf + (k - 1) * jump, jump * s). Any op that mixes channels (pointwise or
// dense conv, grouped conv within a group, residual add) takes the max rf of
// the channels it reads. Channel shuffle is tracked as the exact permutation,
// and anything downstream of a global pool is marked global.

#ifndef IDLENET_RECEPTIVE_FIELD_H_
#define IDLENET_RECEPTIVE_FIELD_H_

#include <cstdint>
#include <string>
#include <vector>

#include "idlenet/block.h"
#include "idlenet/graph.h"
#include "idlenet/network.h"

namespace idlenet {

struct ChannelRF {
  int64_t rf = 1;
  int64_t jump = 1;
  bool global = false;
  bool operator==(const ChannelRF&) const = default;
};

// Maximal run of adjacent channels sharing the same receptive field.
struct RFGroup {
  int64_t lo = 0;
  int64_t hi = 0;  // exclusive
  int64_t rf = 1;
  int64_t jump = 1;
  bool global = false;
  bool operator==(const RFGroup&) const = default;
};

struct RFState {
  std::vector<ChannelRF> channels;

  static RFState Fresh(int64_t channels) {
    return RFState{std::vector<ChannelRF>(channels)};
  }
  int64_t size() const { return static_cast<int64_t>(channels.size()); }
  std::vector<RFGroup> Groups() const;
  // Header group,ch_lo,ch_hi,rf,jump; rf is "global" for global groups.
  std::string ToCsv() const;
};

// Throws ShapeError when the state width does not match the graph input.
RFState PropagateRF(const RFState& state, const Graph& graph,
                    int64_t in_channels);
RFState PropagateRF(const RFState& state, const BlockConfig& block);
// Through the stem and all blocks (the head is global by construction).
RFState PropagateRF(const NetworkSpec& spec);

// Measured receptive field of one output scalar: bounding box of the input
// pixels whose perturbation changes it by more than 1e-12.
struct ProbeExtent {
  int64_t rows = 0;
  int64_t cols = 0;
  bool empty() const { return rows == 0 || cols == 0; }
};

// Probes the stem + blocks of spec with every conv/dense weight set to
// 1/fan_in, affine to identity and activations to identity, so that no
// contribution can cancel. Returns one extent per output channel at output
// position (y, x); negative y/x select the centre. Throws std::out_of_range
// for positions outside the output map.
std::vector<ProbeExtent> ProbeRF(const NetworkSpec& spec, int64_t y = -1,
                                 int64_t x = -1);

// Compares analytic and probed extents per channel. A channel whose analytic
// window does not fit inside the input around the probe point is skipped.
struct RFComparison {
  int64_t compared = 0;
  int64_t skipped = 0;
  std::vector<std::string> disagreements;
  bool ok() const { return disagreements.empty(); }
};
RFComparison CompareRF(const NetworkSpec& spec);

}  // namespace idlenet

#endif  // IDLENET_RECEPTIVE_FIELD_H_
