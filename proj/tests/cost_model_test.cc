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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "idlenet/cost_model.h"
#include "idlenet/network.h"
#include "reference.h"

namespace idlenet {
namespace {

const std::string kConfigs = IDLENET_CONFIG_DIR;

TEST(ClosedFormTest, SpotValues) {
  EXPECT_EQ(MaddsMBBlock(16, 16, 6.0, 3, 1, 32, 32), 8060928u);
  EXPECT_EQ(MaddsMBBlock(16, 16, 6.0, 3, 2, 32, 32), 4374528u);
  EXPECT_EQ(MaddsIdleBlock(16, 6.0, 3, 1, 0.5, 32, 32), 4915200u);
  EXPECT_EQ(IdleSavings(16, 6.0, 0.5, 32, 32, 1), 3145728u);
}

TEST(ClosedFormTest, HalvingOnlyTouchesPointwiseTerms) {
  const uint64_t dw = 2u * 96 * 9 * 1024;
  EXPECT_EQ(MaddsMBBlock(16, 16, 6.0, 3, 1, 32, 32) - dw,
            2 * (MaddsIdleBlock(16, 6.0, 3, 1, 0.5, 32, 32) - dw));
}

// 100 random blocks: the closed form, the executed counter and the
// test-local per-layer tally all agree exactly.
TEST(ClosedFormTest, RandomBlocksMatchCounterAndReference) {
  std::mt19937_64 rng(2024);
  auto pick = [&](int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
  };
  for (int i = 0; i < 100; ++i) {
    const bool idle = i % 2 == 1;
    const int64_t c = pick(2, 24), k = 2 * pick(0, 3) + 1;
    const double r = static_cast<double>(pick(1, 6));
    const int64_t h = pick(1, 14), w = pick(1, 14);
    const int64_t e = std::llround(r * c);
    uint64_t closed, ref;
    BlockConfig cfg;
    if (idle) {
      const double alpha = pick(1, 3) / 4.0;
      cfg = MakeIdleConfig(pick(0, 1) ? BlockKind::kIdleL : BlockKind::kIdleR,
                           c, r, k, alpha);
      if (cfg.idle_channels() < 1 || cfg.active_channels() < 1) continue;
      closed = MaddsIdleBlock(c, r, k, 1, alpha, h, w);
      ref = 2 * reference::IdleBlockMacs(cfg.active_channels(), e, k, h, w);
    } else {
      const int64_t cout = pick(1, 24), s = pick(1, 2);
      cfg = MakeMBBlockConfig(c, cout, r, k, s);
      closed = MaddsMBBlock(c, cout, r, k, s, h, w);
      ref = 2 * reference::MBBlockMacs(c, cout, e, k, s, h, w);
    }
    ExecContext ctx;
    BuildBlock(cfg, {.seed = static_cast<uint64_t>(i)})
        .Forward(Tensor4({1, c, h, w}), &ctx);
    ASSERT_EQ(closed, ref) << cfg.ToString();
    ASSERT_EQ(closed, ctx.madds()) << cfg.ToString();
  }
}

TEST(ClosedFormTest, SavingsIdentityOnRandomDraws) {
  std::mt19937_64 rng(7);
  auto pick = [&](int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
  };
  for (int i = 0; i < 200; ++i) {
    const int64_t c = 4 * pick(1, 40), h = pick(1, 64), w = pick(1, 64);
    const double r = static_cast<double>(pick(1, 6));
    const double alpha = pick(1, 3) / 4.0;
    const int64_t k = 2 * pick(1, 3) + 1;
    EXPECT_EQ(MaddsMBBlock(c, c, r, k, 1, h, w) -
                  MaddsIdleBlock(c, r, k, 1, alpha, h, w),
              IdleSavings(c, r, alpha, h, w, 1));
  }
}

TEST(NetworkCostTest, BundledConfigsVerify) {
  for (const char* name :
       {"mbv3-like-base", "mbv3-hc-15-10", "lr-alternating-15-20",
        "efb0-hc-16-14", "toy-hc4", "rf-two-idler"}) {
    NetworkSpec spec = LoadSpec(kConfigs + "/" + name + ".json");
    // Verification runs a forward pass; a smaller map keeps it quick while
    // still exercising every stride.
    const int64_t side = std::min<int64_t>(spec.in_height, 64);
    const CostReport r = NetworkCost(spec, side, side, true);
    EXPECT_TRUE(r.ok()) << name << ": " << r.ToTable();
    ASSERT_TRUE(r.total_oracle_madds.has_value());
    EXPECT_EQ(*r.total_oracle_madds, r.total_madds) << name;
  }
}

TEST(NetworkCostTest, HybridIsCheaperThanSameDepthMonotonic) {
  const NetworkSpec hc = LoadSpec(kConfigs + "/mbv3-hc-15-20.json");
  const CostReport a = NetworkCost(hc);
  const CostReport b = NetworkCost(ReplaceIdleWithMB(hc));
  EXPECT_LT(a.total_madds, b.total_madds);
  EXPECT_EQ(b.total_madds - a.total_madds, a.savings_vs_monotonic);
}

TEST(NetworkCostTest, CsvSchema) {
  const CostReport r = NetworkCost(LoadSpec(kConfigs + "/toy-hc4.json"));
  const std::string csv = r.ToCsv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "index,kind,analytic_madds,analytic_params,oracle_madds");
  EXPECT_NE(csv.find("\ntotal,"), std::string::npos);
}

}  // namespace
}  // namespace idlenet
