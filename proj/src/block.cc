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

#include "idlenet/block.h"

#include <cmath>
#include <sstream>
#include <tuple>

namespace idlenet {
namespace {

constexpr BlockKind kAllKinds[] = {
    BlockKind::kBottleneck, BlockKind::kMBBlock, BlockKind::kShuffleV1,
    BlockKind::kShuffleV2,  BlockKind::kIdleL,   BlockKind::kIdleR,
    BlockKind::kISB};

void Require(bool ok, const BlockConfig& cfg, const std::string& what) {
  if (!ok) throw ConfigError(cfg.ToString() + ": " + what);
}

// global pool -> dense -> relu -> dense -> hard sigmoid -> channel gate.
int SqueezeExcite(GraphBuilder& b, int in, int64_t channels, int64_t squeeze) {
  const int pooled = b.GlobalPool(in);
  int s = b.DenseLayer(pooled, "se.reduce", channels, squeeze);
  s = b.Act(s, Activation::kRelu);
  s = b.DenseLayer(s, "se.expand", squeeze, channels);
  s = b.Act(s, Activation::kHardSigmoid);
  return b.Scale(in, s);
}

// pointwise expand -> depthwise -> [SE] -> pointwise project (linear).
int InvertedBody(GraphBuilder& b, int in, int64_t in_channels,
                 int64_t out_channels, const BlockConfig& cfg) {
  const int64_t ce = cfg.expanded_channels();
  int t = b.Conv(in, "expand", in_channels, ce, 1, 1, 1);
  t = b.Affine(t, "expand_bn", ce);
  t = b.Act(t, cfg.activation);
  t = b.Conv(t, "depthwise", ce, ce, cfg.kernel, cfg.stride, ce);
  t = b.Affine(t, "depthwise_bn", ce);
  t = b.Act(t, cfg.activation);
  if (cfg.se) t = SqueezeExcite(b, t, ce, cfg.se_channels());
  t = b.Conv(t, "project", ce, out_channels, 1, 1, 1);
  return b.Affine(t, "project_bn", out_channels);
}

// Shared by IdleBlock and ISB; returns the concatenated output slot.
int IdleBody(GraphBuilder& b, const BlockConfig& cfg, bool left) {
  const int64_t active = cfg.active_channels();
  const int64_t idle = cfg.idle_channels();
  int x1, x2;
  if (left) {
    std::tie(x1, x2) = b.Split(GraphBuilder::input(), active);
  } else {
    std::tie(x2, x1) = b.Split(GraphBuilder::input(), idle);
  }
  int y1 = InvertedBody(b, x1, active, active, cfg);
  if (cfg.active_residual) y1 = b.AddValues(x1, y1);
  return left ? b.Concat(y1, x2) : b.Concat(x2, y1);
}

Block Finish(const BlockConfig& cfg, GraphBuilder&& b, int out) {
  return Block{cfg, std::move(b).Finish(out)};
}

void RequireKind(const BlockConfig& cfg, bool ok) {
  Require(ok, cfg, "builder called with the wrong block kind");
}

}  // namespace

std::string_view BlockKindName(BlockKind kind) {
  switch (kind) {
    case BlockKind::kBottleneck: return "Bottleneck";
    case BlockKind::kMBBlock: return "MBBlock";
    case BlockKind::kShuffleV1: return "ShuffleV1";
    case BlockKind::kShuffleV2: return "ShuffleV2";
    case BlockKind::kIdleL: return "IdleL";
    case BlockKind::kIdleR: return "IdleR";
    case BlockKind::kISB: return "ISB";
  }
  return "?";
}

BlockKind ParseBlockKind(std::string_view name) {
  for (BlockKind k : kAllKinds) {
    if (BlockKindName(k) == name) return k;
  }
  throw ConfigError("unknown block kind '" + std::string(name) + "'");
}

bool IsIdleKind(BlockKind kind) {
  return kind == BlockKind::kIdleL || kind == BlockKind::kIdleR ||
         kind == BlockKind::kISB;
}

int64_t BlockConfig::expanded_channels() const {
  switch (kind) {
    case BlockKind::kBottleneck:
    case BlockKind::kShuffleV1:
      return std::llround(static_cast<double>(in_channels) / expansion);
    case BlockKind::kShuffleV2:
      return in_channels / 2;
    default:
      return std::llround(expansion * static_cast<double>(in_channels));
  }
}

int64_t BlockConfig::se_channels() const {
  return std::max<int64_t>(1, expanded_channels() / se_reduction);
}

int64_t BlockConfig::idle_channels() const {
  if (!IsIdleKind(kind)) return 0;
  // Tolerance absorbs products like 0.29 * 100 landing just below 29.
  return static_cast<int64_t>(
      std::floor(static_cast<double>(in_channels) * idle_alpha + 1e-9));
}

int64_t BlockConfig::active_channels() const {
  return in_channels - idle_channels();
}

ChannelRange BlockConfig::idle_range() const {
  const int64_t idle = idle_channels();
  if (kind == BlockKind::kIdleR) return {0, idle};
  return {in_channels - idle, in_channels};
}

ChannelRange BlockConfig::active_range() const {
  const int64_t idle = idle_channels();
  if (kind == BlockKind::kIdleR) return {idle, in_channels};
  return {0, in_channels - idle};
}

bool BlockConfig::has_residual() const {
  switch (kind) {
    case BlockKind::kMBBlock:
    case BlockKind::kBottleneck:
    case BlockKind::kShuffleV1:
      return in_channels == out_channels && stride == 1;
    default:
      return false;
  }
}

std::string BlockConfig::ToString() const {
  std::ostringstream os;
  os << BlockKindName(kind) << "(cin=" << in_channels
     << ",cout=" << out_channels << ",r=" << expansion << ",k=" << kernel
     << ",s=" << stride;
  if (IsIdleKind(kind)) os << ",alpha=" << idle_alpha;
  if (se) os << ",se/" << se_reduction;
  os << ")";
  return os.str();
}

void BlockConfig::Validate() const {
  Require(in_channels >= 1 && out_channels >= 1, *this,
          "channel counts must be positive");
  Require(kernel >= 1 && kernel % 2 == 1, *this, "kernel must be odd");
  Require(stride >= 1, *this, "stride must be positive");
  Require(std::isfinite(expansion) && expansion > 0.0, *this,
          "expansion must be > 0");
  Require(se_reduction >= 1, *this, "se_reduction must be >= 1");
  Require(expanded_channels() >= 1, *this, "expanded width rounds to zero");

  switch (kind) {
    case BlockKind::kIdleL:
    case BlockKind::kIdleR:
    case BlockKind::kISB:
      Require(in_channels == out_channels, *this,
              "idle blocks require C_in == C_out");
      Require(stride == 1, *this, "idle blocks require stride 1");
      Require(idle_alpha > 0.0 && idle_alpha < 1.0, *this,
              "alpha must lie in (0, 1)");
      Require(idle_channels() >= 1, *this, "idle branch is empty");
      Require(active_channels() >= 1, *this, "active branch is empty");
      if (kind == BlockKind::kISB) {
        Require(shuffle_groups >= 1 && in_channels % shuffle_groups == 0,
                *this, "shuffle groups must divide C");
      }
      break;
    case BlockKind::kShuffleV2:
      Require(in_channels == out_channels && in_channels % 2 == 0, *this,
              "ShuffleV2 requires C_in == C_out and even C");
      Require(stride == 1, *this, "ShuffleV2 stride-2 variant unsupported");
      break;
    case BlockKind::kShuffleV1: {
      const int64_t g = shuffle_groups;
      Require(g >= 1 && in_channels % g == 0 && out_channels % g == 0 &&
                  expanded_channels() % g == 0,
              *this, "groups must divide C_in, C_out and the narrow width");
      break;
    }
    case BlockKind::kMBBlock:
    case BlockKind::kBottleneck:
      break;
  }
}

BlockConfig MakeMBBlockConfig(int64_t in_channels, int64_t out_channels,
                              double expansion, int64_t kernel,
                              int64_t stride) {
  BlockConfig cfg;
  cfg.kind = BlockKind::kMBBlock;
  cfg.in_channels = in_channels;
  cfg.out_channels = out_channels;
  cfg.expansion = expansion;
  cfg.kernel = kernel;
  cfg.stride = stride;
  return cfg;
}

BlockConfig MakeIdleConfig(BlockKind kind, int64_t channels, double expansion,
                           int64_t kernel, double alpha) {
  BlockConfig cfg = MakeMBBlockConfig(channels, channels, expansion, kernel, 1);
  cfg.kind = kind;
  cfg.idle_alpha = alpha;
  return cfg;
}

Tensor4 Block::Forward(const Tensor4& x, ExecContext* ctx) const {
  if (x.c() != config.in_channels) {
    throw ShapeError(config.ToString() + ": input has " +
                     std::to_string(x.c()) + " channels");
  }
  return graph.Forward(x, ctx);
}

Block BuildMBBlock(const BlockConfig& cfg, const BuildOptions& opts) {
  RequireKind(cfg, cfg.kind == BlockKind::kMBBlock);
  cfg.Validate();
  GraphBuilder b(opts.prefix, opts.seed);
  int out = InvertedBody(b, GraphBuilder::input(), cfg.in_channels,
                         cfg.out_channels, cfg);
  if (cfg.has_residual()) out = b.AddValues(GraphBuilder::input(), out);
  return Finish(cfg, std::move(b), out);
}

Block BuildIdleBlock(const BlockConfig& cfg, const BuildOptions& opts) {
  RequireKind(cfg, cfg.kind == BlockKind::kIdleL ||
                       cfg.kind == BlockKind::kIdleR);
  cfg.Validate();
  GraphBuilder b(opts.prefix, opts.seed);
  const int out = IdleBody(b, cfg, cfg.kind == BlockKind::kIdleL);
  return Finish(cfg, std::move(b), out);
}

Block BuildISB(const BlockConfig& cfg, const BuildOptions& opts) {
  RequireKind(cfg, cfg.kind == BlockKind::kISB);
  cfg.Validate();
  GraphBuilder b(opts.prefix, opts.seed);
  const int cat = IdleBody(b, cfg, /*left=*/true);
  const int out = b.Shuffle(cat, cfg.shuffle_groups);
  return Finish(cfg, std::move(b), out);
}

Block BuildBottleneck(const BlockConfig& cfg, const BuildOptions& opts) {
  RequireKind(cfg, cfg.kind == BlockKind::kBottleneck);
  cfg.Validate();
  const int64_t cb = cfg.expanded_channels();
  GraphBuilder b(opts.prefix, opts.seed);
  int t = b.Conv(GraphBuilder::input(), "reduce", cfg.in_channels, cb, 1, 1, 1);
  t = b.Affine(t, "reduce_bn", cb);
  t = b.Act(t, cfg.activation);
  t = b.Conv(t, "spatial", cb, cb, cfg.kernel, cfg.stride, 1);
  t = b.Affine(t, "spatial_bn", cb);
  t = b.Act(t, cfg.activation);
  t = b.Conv(t, "expand", cb, cfg.out_channels, 1, 1, 1);
  t = b.Affine(t, "expand_bn", cfg.out_channels);
  if (cfg.has_residual()) t = b.AddValues(GraphBuilder::input(), t);
  return Finish(cfg, std::move(b), t);
}

Block BuildShuffleV1(const BlockConfig& cfg, const BuildOptions& opts) {
  RequireKind(cfg, cfg.kind == BlockKind::kShuffleV1);
  cfg.Validate();
  const int64_t cb = cfg.expanded_channels();
  const int64_t g = cfg.shuffle_groups;
  GraphBuilder b(opts.prefix, opts.seed);
  int t = b.Conv(GraphBuilder::input(), "reduce", cfg.in_channels, cb, 1, 1, g);
  t = b.Affine(t, "reduce_bn", cb);
  t = b.Act(t, cfg.activation);
  t = b.Shuffle(t, g);
  t = b.Conv(t, "depthwise", cb, cb, cfg.kernel, cfg.stride, cb);
  t = b.Affine(t, "depthwise_bn", cb);
  t = b.Conv(t, "expand", cb, cfg.out_channels, 1, 1, g);
  t = b.Affine(t, "expand_bn", cfg.out_channels);
  if (cfg.has_residual()) t = b.AddValues(GraphBuilder::input(), t);
  return Finish(cfg, std::move(b), t);
}

Block BuildShuffleV2(const BlockConfig& cfg, const BuildOptions& opts) {
  RequireKind(cfg, cfg.kind == BlockKind::kShuffleV2);
  cfg.Validate();
  const int64_t half = cfg.in_channels / 2;
  GraphBuilder b(opts.prefix, opts.seed);
  auto [pass, x] = b.Split(GraphBuilder::input(), half);
  int t = b.Conv(x, "reduce", half, half, 1, 1, 1);
  t = b.Affine(t, "reduce_bn", half);
  t = b.Act(t, cfg.activation);
  t = b.Conv(t, "depthwise", half, half, cfg.kernel, 1, half);
  t = b.Affine(t, "depthwise_bn", half);
  t = b.Conv(t, "expand", half, half, 1, 1, 1);
  t = b.Affine(t, "expand_bn", half);
  t = b.Act(t, cfg.activation);
  const int out = b.Shuffle(b.Concat(pass, t), 2);
  return Finish(cfg, std::move(b), out);
}

Block BuildBlock(const BlockConfig& cfg, const BuildOptions& opts) {
  switch (cfg.kind) {
    case BlockKind::kMBBlock: return BuildMBBlock(cfg, opts);
    case BlockKind::kIdleL:
    case BlockKind::kIdleR: return BuildIdleBlock(cfg, opts);
    case BlockKind::kISB: return BuildISB(cfg, opts);
    case BlockKind::kBottleneck: return BuildBottleneck(cfg, opts);
    case BlockKind::kShuffleV1: return BuildShuffleV1(cfg, opts);
    case BlockKind::kShuffleV2: return BuildShuffleV2(cfg, opts);
  }
  throw ConfigError("unknown block kind");
}

}  // namespace idlenet
