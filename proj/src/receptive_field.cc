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

#include "idlenet/receptive_field.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace idlenet {
namespace {

using Channels = std::vector<ChannelRF>;

ChannelRF Merge(const ChannelRF& a, const ChannelRF& b) {
  return {std::max(a.rf, b.rf), std::max(a.jump, b.jump), a.global || b.global};
}

ChannelRF MergeRange(const Channels& in, int64_t lo, int64_t hi) {
  ChannelRF m = in[lo];
  for (int64_t i = lo + 1; i < hi; ++i) m = Merge(m, in[i]);
  return m;
}

Channels Global(int64_t n) {
  return Channels(n, ChannelRF{1, 1, true});
}

}  // namespace

std::vector<RFGroup> RFState::Groups() const {
  std::vector<RFGroup> groups;
  for (int64_t i = 0; i < size(); ++i) {
    const ChannelRF& c = channels[i];
    if (!groups.empty() && groups.back().rf == c.rf &&
        groups.back().jump == c.jump && groups.back().global == c.global) {
      groups.back().hi = i + 1;
    } else {
      groups.push_back({i, i + 1, c.rf, c.jump, c.global});
    }
  }
  return groups;
}

std::string RFState::ToCsv() const {
  std::ostringstream os;
  os << "group,ch_lo,ch_hi,rf,jump\n";
  const auto groups = Groups();
  for (size_t i = 0; i < groups.size(); ++i) {
    const RFGroup& g = groups[i];
    os << i << ',' << g.lo << ',' << g.hi << ',';
    if (g.global) {
      os << "global";
    } else {
      os << g.rf;
    }
    os << ',' << g.jump << '\n';
  }
  return os.str();
}

RFState PropagateRF(const RFState& state, const Graph& graph,
                    int64_t in_channels) {
  if (state.size() != in_channels) {
    throw ShapeError("receptive field: state has " +
                     std::to_string(state.size()) + " channels, graph expects " +
                     std::to_string(in_channels));
  }
  std::vector<Channels> slots(graph.num_slots());
  slots[Graph::kInputSlot] = state.channels;
  for (const Node& node : graph.nodes()) {
    const Channels& in = slots[node.inputs[0]];
    Channels out;
    switch (node.kind) {
      case OpKind::kConv2d: {
        const int64_t g = node.groups;
        const int64_t in_per = node.in_channels / g;
        const int64_t out_per = node.out_channels / g;
        out.resize(node.out_channels);
        for (int64_t o = 0; o < node.out_channels; ++o) {
          const int64_t grp = o / out_per;
          ChannelRF m = MergeRange(in, grp * in_per, (grp + 1) * in_per);
          m.rf += (node.kernel - 1) * m.jump;
          m.jump *= node.stride;
          out[o] = m;
        }
        break;
      }
      case OpKind::kSplit:
        slots[node.outputs[0]] = Channels(in.begin(), in.begin() + node.split_at);
        slots[node.outputs[1]] = Channels(in.begin() + node.split_at, in.end());
        continue;
      case OpKind::kConcat: {
        out = in;
        const Channels& b = slots[node.inputs[1]];
        out.insert(out.end(), b.begin(), b.end());
        break;
      }
      case OpKind::kShuffle: {
        const int64_t c = static_cast<int64_t>(in.size());
        out.resize(c);
        for (int64_t i = 0; i < c; ++i) {
          out[ShuffledChannel(i, c, node.groups)] = in[i];
        }
        break;
      }
      case OpKind::kAdd:
      case OpKind::kScaleChannels: {
        const Channels& b = slots[node.inputs[1]];
        out.resize(in.size());
        for (size_t i = 0; i < in.size(); ++i) out[i] = Merge(in[i], b[i]);
        break;
      }
      case OpKind::kGlobalAvgPool:
        out = Global(static_cast<int64_t>(in.size()));
        break;
      case OpKind::kFlatten:
        // Output width depends on the spatial size, which is not tracked;
        // flatten only appears in heads, which are outside this analysis.
        throw std::invalid_argument("receptive field undefined past flatten");
      case OpKind::kDense:
        out = Global(node.out_channels);
        break;
      case OpKind::kAffine:
      case OpKind::kActivation:
        out = in;
        break;
    }
    slots[node.outputs[0]] = std::move(out);
  }
  return RFState{slots[graph.output_slot()]};
}

RFState PropagateRF(const RFState& state, const BlockConfig& block) {
  const Block built = BuildBlock(block);
  return PropagateRF(state, built.graph, block.in_channels);
}

RFState PropagateRF(const NetworkSpec& spec) {
  NetworkSpec body = spec;
  body.head.reset();
  body.classes.reset();
  const Network net = BuildNetwork(body);
  RFState s = RFState::Fresh(spec.in_channels);
  s = PropagateRF(s, net.stem(), spec.in_channels);
  for (const Block& b : net.blocks()) {
    s = PropagateRF(s, b.graph, b.config.in_channels);
  }
  return s;
}

std::vector<ProbeExtent> ProbeRF(const NetworkSpec& spec, int64_t y,
                                 int64_t x) {
  NetworkSpec body = spec;
  body.head.reset();
  body.classes.reset();
  body.hc.reset();
  if (body.stem) body.stem->activation = Activation::kIdentity;
  for (auto& b : body.blocks) b.activation = Activation::kIdentity;
  Network net = BuildNetwork(body);
  for (NamedTensor* p : net.mutable_params()) {
    const std::string& name = p->name;
    Tensor4& t = p->value;
    double fill = 0.0;
    if (name.ends_with(".weight")) {
      fill = 1.0 / static_cast<double>(t.c() * t.h() * t.w());
    } else if (name.ends_with(".scale")) {
      fill = 1.0;
    }
    t = Tensor4::Filled(t.shape(), fill);
  }

  const Shape4 in_shape = body.InputShape(1);
  const Tensor4 base = net.Forward(Tensor4(in_shape));
  const int64_t oh = base.h(), ow = base.w(), oc = base.c();
  if (y < 0) y = oh / 2;
  if (x < 0) x = ow / 2;
  if (y >= oh || x >= ow) {
    throw std::out_of_range("probe position outside the " +
                            std::to_string(oh) + "x" + std::to_string(ow) +
                            " output");
  }

  struct Box {
    int64_t r0 = INT64_MAX, r1 = -1, c0 = INT64_MAX, c1 = -1;
  };
  std::vector<Box> boxes(oc);
  for (int64_t py = 0; py < in_shape.h; ++py) {
    for (int64_t px = 0; px < in_shape.w; ++px) {
      Tensor4 probe(in_shape);
      for (int64_t c = 0; c < in_shape.c; ++c) probe.at(0, c, py, px) = 1.0;
      const Tensor4 out = net.Forward(probe);
      for (int64_t c = 0; c < oc; ++c) {
        if (std::abs(out.at(0, c, y, x) - base.at(0, c, y, x)) > 1e-12) {
          Box& b = boxes[c];
          b.r0 = std::min(b.r0, py);
          b.r1 = std::max(b.r1, py);
          b.c0 = std::min(b.c0, px);
          b.c1 = std::max(b.c1, px);
        }
      }
    }
  }
  std::vector<ProbeExtent> extents(oc);
  for (int64_t c = 0; c < oc; ++c) {
    if (boxes[c].r1 >= 0) {
      extents[c] = {boxes[c].r1 - boxes[c].r0 + 1, boxes[c].c1 - boxes[c].c0 + 1};
    }
  }
  return extents;
}

RFComparison CompareRF(const NetworkSpec& spec) {
  const RFState analytic = PropagateRF(spec);
  const std::vector<ProbeExtent> probed = ProbeRF(spec);
  RFComparison cmp;
  // Output centre, mapped back to input coordinates.
  const int64_t h = spec.in_height, w = spec.in_width;
  for (int64_t c = 0; c < analytic.size(); ++c) {
    const ChannelRF& a = analytic.channels[c];
    const ProbeExtent& p = probed[c];
    std::string expect;
    bool match;
    if (a.global) {
      match = p.rows == h && p.cols == w;
      expect = "global";
    } else {
      const int64_t out_h = (h + a.jump - 1) / a.jump;
      const int64_t out_w = (w + a.jump - 1) / a.jump;
      const int64_t cy = (out_h / 2) * a.jump, cx = (out_w / 2) * a.jump;
      const int64_t r = (a.rf - 1) / 2;
      if (cy - r < 0 || cy + r >= h || cx - r < 0 || cx + r >= w) {
        ++cmp.skipped;
        continue;
      }
      match = p.rows == a.rf && p.cols == a.rf;
      expect = std::to_string(a.rf);
    }
    ++cmp.compared;
    if (!match) {
      cmp.disagreements.push_back(
          "channel " + std::to_string(c) + ": analytic " + expect +
          ", probed " + std::to_string(p.rows) + "x" + std::to_string(p.cols));
    }
  }
  return cmp;
}

}  // namespace idlenet
