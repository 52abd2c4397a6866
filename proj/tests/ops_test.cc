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

#include <cmath>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "idlenet/init.h"
#include "idlenet/ops.h"
#include "idlenet/parallel.h"
#include "reference.h"

namespace idlenet {
namespace {

std::vector<double> ToVec(const Tensor4& t) {
  return {t.data().begin(), t.data().end()};
}

struct ConvCase {
  int64_t n, cin, cout, h, w, k, s, groups;
};

TEST(Conv2dTest, MatchesDirectSummationBitwise) {
  const std::vector<ConvCase> cases = {
      {1, 3, 4, 7, 7, 3, 1, 1},  {2, 4, 4, 8, 6, 3, 2, 4},
      {1, 6, 9, 5, 5, 1, 1, 3},  {1, 5, 5, 9, 9, 5, 2, 5},
      {3, 2, 3, 4, 11, 3, 2, 1}, {1, 8, 8, 1, 1, 3, 1, 8},
      {1, 4, 6, 6, 6, 7, 3, 2},
  };
  uint64_t seed = 0;
  for (const ConvCase& c : cases) {
    ConvGeometry g{c.cin, c.cout, c.k, c.s, c.groups};
    const Tensor4 x = RandomTensor({c.n, c.cin, c.h, c.w}, seed, "x");
    const Tensor4 wt = RandomTensor(g.WeightShape(), seed++, "w");
    const Tensor4 y = Conv2d(x, g, wt);
    int64_t oh = 0, ow = 0;
    const std::vector<double> want = reference::DirectConv(
        ToVec(x), c.n, c.cin, c.h, c.w, ToVec(wt), c.cout, c.k, c.s, c.groups,
        &oh, &ow);
    ASSERT_EQ(y.shape(), (Shape4{c.n, c.cout, oh, ow}));
    EXPECT_EQ(ToVec(y), want) << "case k=" << c.k << " s=" << c.s
                              << " groups=" << c.groups;
  }
}

TEST(Conv2dTest, OutputSizeIsCeilOfStride) {
  EXPECT_EQ(ConvOutputSize(7, 2), 4);
  EXPECT_EQ(ConvOutputSize(8, 2), 4);
  EXPECT_EQ(ConvOutputSize(1, 2), 1);
  EXPECT_EQ(ConvOutputSize(224, 1), 224);
}

TEST(Conv2dTest, CountsClosedFormMacs) {
  ExecContext ctx;
  ConvGeometry g{8, 8, 3, 2, 8};
  Conv2d(Tensor4({2, 8, 9, 9}), g, Tensor4(g.WeightShape(), 1.0), &ctx);
  // 2 batch * 8 channels * 5x5 positions * 9 taps.
  EXPECT_EQ(ctx.macs(), 2u * 8 * 25 * 9);
  EXPECT_EQ(ctx.madds(), 2 * ctx.macs());
  EXPECT_EQ(Conv2dMacs({2, 8, 9, 9}, 8, 3, 2, 8), ctx.macs());
}

TEST(Conv2dTest, RejectsBadGeometry) {
  ConvGeometry g{6, 4, 3, 1, 4};  // groups must divide in_channels
  EXPECT_THROW(g.Validate(Shape4{4, 1, 3, 3}), ShapeError);
  ConvGeometry ok{4, 4, 3, 1, 1};
  EXPECT_THROW(Conv2d(Tensor4({1, 3, 4, 4}), ok, Tensor4(ok.WeightShape())),
               ShapeError);
}

TEST(ShuffleTest, SixChannelsTwoGroups) {
  Tensor4 x({1, 6, 1, 1});
  for (int c = 0; c < 6; ++c) x.at(0, c, 0, 0) = c;
  const Tensor4 y = ChannelShuffle(x, 2);
  EXPECT_EQ(ToVec(y), (std::vector<double>{0, 3, 1, 4, 2, 5}));
}

TEST(ShuffleTest, DegenerateGroupsAreIdentity) {
  const Tensor4 x = RandomTensor({2, 12, 3, 3}, 4, "x");
  EXPECT_TRUE(ChannelShuffle(x, 1).BitwiseEquals(x));
  EXPECT_TRUE(ChannelShuffle(x, 12).BitwiseEquals(x));
}

TEST(ShuffleTest, InverseIsShuffleByComplement) {
  for (int64_t c = 1; c <= 24; ++c) {
    const Tensor4 x = RandomTensor({1, c, 2, 2}, c, "x");
    for (int64_t g = 1; g <= c; ++g) {
      if (c % g) continue;
      EXPECT_TRUE(ChannelShuffle(ChannelShuffle(x, g), c / g).BitwiseEquals(x))
          << "C=" << c << " g=" << g;
    }
  }
  EXPECT_THROW(ChannelShuffle(Tensor4({1, 6, 1, 1}), 4), ShapeError);
}

TEST(ActivationTest, KnownValues) {
  EXPECT_EQ(ApplyActivation(Activation::kHardSwish, 3.0), 3.0);
  EXPECT_EQ(ApplyActivation(Activation::kHardSwish, -3.0), 0.0);
  EXPECT_EQ(ApplyActivation(Activation::kHardSwish, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(ApplyActivation(Activation::kHardSwish, 1.0), 4.0 / 6.0);
  EXPECT_EQ(ApplyActivation(Activation::kHardSigmoid, 0.0), 0.5);
  EXPECT_EQ(ApplyActivation(Activation::kRelu6, 7.5), 6.0);
  EXPECT_EQ(ApplyActivation(Activation::kRelu, -1.0), 0.0);
  EXPECT_EQ(ParseActivation("hswish"), Activation::kHardSwish);
  EXPECT_THROW(ParseActivation("gelu"), std::invalid_argument);
}

TEST(SplitConcatTest, RoundTrip) {
  const Tensor4 x = RandomTensor({2, 7, 3, 2}, 1, "x");
  auto [a, b] = SplitChannels(x, 3);
  EXPECT_EQ(a.c(), 3);
  EXPECT_EQ(b.c(), 4);
  EXPECT_TRUE(ConcatChannels(a, b).BitwiseEquals(x));
  EXPECT_THROW(SplitChannels(x, 0), ShapeError);
}

TEST(FlattenTest, KeepsMemoryOrder) {
  const Tensor4 x = RandomTensor({2, 3, 4, 5}, 2, "x");
  const Tensor4 y = Flatten(x);
  EXPECT_EQ(y.shape(), (Shape4{2, 60, 1, 1}));
  EXPECT_EQ(ToVec(y), ToVec(x));
  EXPECT_TRUE(FlattenVjp(x.shape(), y).BitwiseEquals(x));
}

TEST(DenseTest, CountsInTimesOutPerRow) {
  ExecContext ctx;
  const Tensor4 x = RandomTensor({3, 5, 1, 1}, 0, "x");
  const Tensor4 w = RandomTensor({4, 5, 1, 1}, 0, "w");
  const std::vector<double> bias(4, 0.25);
  const Tensor4 y = Dense(x, w, bias, &ctx);
  EXPECT_EQ(ctx.macs(), 3u * 5 * 4);
  double want = 0.0;
  for (int i = 0; i < 5; ++i) want += x.at(1, i, 0, 0) * w.at(2, i, 0, 0);
  EXPECT_NEAR(y.at(1, 2, 0, 0), want + 0.25, 1e-15);
}

TEST(ParallelTest, ThreadCountDoesNotChangeBits) {
  ConvGeometry g{16, 32, 3, 1, 1};
  const Tensor4 x = RandomTensor({2, 16, 12, 12}, 9, "x");
  const Tensor4 w = RandomTensor(g.WeightShape(), 9, "w");
  SetNumThreads(1);
  const Tensor4 one = Conv2d(x, g, w);
  SetNumThreads(4);
  const Tensor4 four = Conv2d(x, g, w);
  SetNumThreads(1);
  EXPECT_TRUE(one.BitwiseEquals(four));
}

TEST(RngTest, CounterStreamIsPositional) {
  CounterRng a(7, "stream"), b(7, "stream"), c(8, "stream");
  EXPECT_EQ(a.Bits(123), b.Bits(123));
  EXPECT_NE(a.Bits(123), c.Bits(123));
  for (uint64_t i = 0; i < 1000; ++i) {
    const double u = a.Uniform(i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace idlenet
