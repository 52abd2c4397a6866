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

#include <vector>

#include <gtest/gtest.h>

#include "idlenet/gradcheck.h"
#include "idlenet/init.h"
#include "idlenet/toy_train.h"

namespace idlenet {
namespace {

TEST(GradCheckTest, EveryOpBelowOpTolerance) {
  for (uint64_t seed : {0u, 1u, 2u}) {
    for (const GradCheckReport& r : GradCheckAllOps(seed)) {
      EXPECT_TRUE(r.pass()) << r.ToString();
      EXPECT_LT(r.max_rel_err(), 1e-6) << r.subject;
    }
  }
}

TEST(GradCheckTest, EveryBlockBelowBlockTolerance) {
  for (uint64_t seed : {0u, 1u}) {
    for (const GradCheckReport& r : GradCheckAllBlocks(seed)) {
      EXPECT_TRUE(r.pass()) << r.ToString();
      EXPECT_LT(r.max_rel_err(), 1e-5) << r.subject;
    }
  }
}

TEST(GradCheckTest, MBBlockOnSpecShape) {
  const Block b = BuildBlock(MakeMBBlockConfig(4, 4, 2.0, 3, 1));
  const GradCheckReport r = GradCheckBlock(b, {1, 4, 6, 6}, {.seed = 0});
  EXPECT_TRUE(r.pass()) << r.ToString();
}

TEST(GradCheckTest, ConvOnSpecShapeAtOpTolerance) {
  GraphBuilder b("", 0);
  const int y = b.Conv(GraphBuilder::input(), "conv", 4, 4, 3, 1, 1);
  const Graph g = std::move(b).Finish(y);
  const GradCheckReport r = GradCheckGraph(
      g, RandomTensor({1, 4, 6, 6}, 0, "x"),
      {.tolerance = kOpGradTolerance, .samples = 1000}, "conv");
  EXPECT_TRUE(r.pass()) << r.ToString();
}

TEST(GradCheckTest, ShuffleOnlyGraphIsExact) {
  GraphBuilder b("", 0);
  const int y = b.Shuffle(GraphBuilder::input(), 3);
  const Graph g = std::move(b).Finish(y);
  const GradCheckReport r =
      GradCheckGraph(g, RandomTensor({2, 6, 3, 3}, 1, "x"), {.samples = 1000});
  // Backward is the exact inverse permutation; what remains is the rounding
  // of (x + eps) - (x - eps) in the difference quotient.
  EXPECT_LT(r.max_rel_err(), 1e-10) << r.ToString();
  const Tensor4 u = RandomTensor({2, 6, 3, 3}, 2, "u");
  const Graph::Trace t = g.ForwardTraced(RandomTensor({2, 6, 3, 3}, 1, "x"));
  EXPECT_TRUE(g.Backward(t, u).input.BitwiseEquals(ChannelShuffle(u, 2)));
}

TEST(GradCheckTest, HybridNetworkBelowBlockTolerance) {
  const Network net = BuildNetwork(ToyHCSpec(0));
  const GradCheckReport r =
      GradCheckNetwork(net, net.spec().InputShape(2), {.seed = 0});
  EXPECT_TRUE(r.pass()) << r.ToString();
}

// The idle input slice reaches the output unchanged, so its gradient is the
// output cotangent on those channels, exactly.
TEST(GradCheckTest, IdleInputGradientIsCotangent) {
  for (BlockKind kind : {BlockKind::kIdleL, BlockKind::kIdleR}) {
    const BlockConfig cfg = MakeIdleConfig(kind, 8, 2.0, 3, 0.5);
    const Block block = BuildBlock(cfg, {.seed = 2});
    const Tensor4 x = RandomTensor({1, 8, 5, 5}, 3, "x");
    const Tensor4 u = RandomTensor({1, 8, 5, 5}, 4, "u");
    const Graph::Trace trace = block.graph.ForwardTraced(x);
    const Graph::Gradients g = block.graph.Backward(trace, u);
    const ChannelRange idle = cfg.idle_range();
    for (int64_t c = idle.lo; c < idle.hi; ++c)
      for (int64_t i = 0; i < 25; ++i)
        ASSERT_EQ(g.input.plane(0, c)[i], u.plane(0, c)[i]);
  }
}

}  // namespace
}  // namespace idlenet
