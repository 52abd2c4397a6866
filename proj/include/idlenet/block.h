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

// Block zoo: Bottleneck, MBBlock (inverted residual), ShuffleBlock v1/v2,
// L/R-IdleBlock and the Inverted Shuffle Block, each built as a Graph.
//
// Idle channel convention (both variants keep channel positions):
//   IdleL: active = [0, C - idle), idle = [C - idle, C), out = concat(y1, x2)
//   IdleR: idle = [0, idle), active = [idle, C),         out = concat(x2, y1)
// with idle = floor(C * alpha). The active branch expands (C - idle) -> r*C,
// runs a k x k depthwise on all r*C channels, and projects back to C - idle.

#ifndef IDLENET_BLOCK_H_
#define IDLENET_BLOCK_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "idlenet/graph.h"
#include "idlenet/ops.h"

namespace idlenet {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class BlockKind {
  kBottleneck,
  kMBBlock,
  kShuffleV1,
  kShuffleV2,
  kIdleL,
  kIdleR,
  kISB,
};

std::string_view BlockKindName(BlockKind kind);
BlockKind ParseBlockKind(std::string_view name);
// IdleL, IdleR and ISB.
bool IsIdleKind(BlockKind kind);

struct ChannelRange {
  int64_t lo = 0;
  int64_t hi = 0;  // exclusive
  int64_t size() const { return hi - lo; }
  bool operator==(const ChannelRange&) const = default;
};

struct BlockConfig {
  BlockKind kind = BlockKind::kMBBlock;
  int64_t in_channels = 0;
  int64_t out_channels = 0;
  double expansion = 1.0;
  int64_t kernel = 3;
  int64_t stride = 1;
  double idle_alpha = 0.5;
  bool se = false;
  int64_t se_reduction = 4;
  Activation activation = Activation::kRelu;
  bool active_residual = true;
  int64_t shuffle_groups = 2;

  // Width the depthwise convolution runs at: round(r * C_in) for MBBlock and
  // idle kinds, round(C_in / r) for Bottleneck and ShuffleV1, C/2 for
  // ShuffleV2.
  int64_t expanded_channels() const;
  int64_t se_channels() const;
  int64_t idle_channels() const;
  int64_t active_channels() const;
  ChannelRange idle_range() const;
  ChannelRange active_range() const;
  // Residual add between block input and output.
  bool has_residual() const;

  // Throws ConfigError describing the first violated constraint.
  void Validate() const;
  std::string ToString() const;
  bool operator==(const BlockConfig&) const = default;
};

BlockConfig MakeMBBlockConfig(int64_t in_channels, int64_t out_channels,
                              double expansion, int64_t kernel, int64_t stride);
BlockConfig MakeIdleConfig(BlockKind kind, int64_t channels, double expansion,
                           int64_t kernel, double alpha);

struct BuildOptions {
  uint64_t seed = 0;
  // Prepended to every parameter name, e.g. "blocks.3.".
  std::string prefix;
};

// A built block. Parameters live in graph; Forward never mutates them.
struct Block {
  BlockConfig config;
  Graph graph;

  Tensor4 Forward(const Tensor4& x, ExecContext* ctx = nullptr) const;
  int64_t ParamCount() const { return graph.ParamCount(); }
};

Block BuildMBBlock(const BlockConfig& cfg, const BuildOptions& opts = {});
Block BuildIdleBlock(const BlockConfig& cfg, const BuildOptions& opts = {});
Block BuildBottleneck(const BlockConfig& cfg, const BuildOptions& opts = {});
Block BuildShuffleV1(const BlockConfig& cfg, const BuildOptions& opts = {});
Block BuildShuffleV2(const BlockConfig& cfg, const BuildOptions& opts = {});
Block BuildISB(const BlockConfig& cfg, const BuildOptions& opts = {});
// Dispatches on cfg.kind.
Block BuildBlock(const BlockConfig& cfg, const BuildOptions& opts = {});

}  // namespace idlenet

#endif  // IDLENET_BLOCK_H_
