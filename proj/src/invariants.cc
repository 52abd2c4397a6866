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

#include "idlenet/invariants.h"

#include <cstdio>
#include <cstring>
#include <sstream>

#include "idlenet/block.h"
#include "idlenet/cost_model.h"
#include "idlenet/gradcheck.h"
#include "idlenet/init.h"
#include "idlenet/receptive_field.h"
#include "idlenet/toy_train.h"

namespace idlenet {
namespace {

// Deterministic draws for configuration sampling.
class Draw {
 public:
  Draw(uint64_t seed, std::string_view stream) : rng_(seed, stream) {}
  int64_t Int(int64_t lo, int64_t hi) {  // inclusive
    return lo + static_cast<int64_t>(rng_.Bits(i_++) % U(hi - lo + 1));
  }
  template <typename T, size_t N>
  T Pick(const T (&items)[N]) {
    return items[Int(0, N - 1)];
  }
  bool Coin() { return Int(0, 1) == 1; }

 private:
  static uint64_t U(int64_t v) { return static_cast<uint64_t>(v); }
  CounterRng rng_;
  uint64_t i_ = 0;
};

constexpr double kExpansions[] = {1.0, 2.0, 2.5, 3.0, 4.0, 6.0};
constexpr int64_t kKernels[] = {1, 3, 5, 7};
constexpr double kAlphas[] = {0.25, 0.5, 0.75};
constexpr Activation kActs[] = {Activation::kRelu, Activation::kHardSwish,
                                Activation::kRelu6};

BlockConfig RandomIdle(Draw& d, BlockKind kind) {
  for (;;) {
    BlockConfig c = MakeIdleConfig(kind, d.Int(2, 40), d.Pick(kExpansions),
                                   d.Pick(kKernels), d.Pick(kAlphas));
    c.activation = d.Pick(kActs);
    c.shuffle_groups = d.Int(1, 4);
    if (c.idle_channels() >= 1 && c.active_channels() >= 1 &&
        c.in_channels % c.shuffle_groups == 0) {
      return c;
    }
  }
}

CheckResult Result(std::string name, const std::vector<std::string>& failures,
                   const std::string& summary) {
  CheckResult r{std::move(name), failures.empty(), summary};
  if (!failures.empty()) {
    r.detail = failures.front();
    if (failures.size() > 1) {
      r.detail += " (+" + std::to_string(failures.size() - 1) + " more)";
    }
  }
  return r;
}

uint64_t ExecutedMadds(const BlockConfig& cfg, int64_t h, int64_t w,
                       uint64_t seed) {
  const Block b = BuildBlock(cfg, {seed, "oracle."});
  const Tensor4 x = RandomTensor({1, cfg.in_channels, h, w}, seed, "oracle.x");
  ExecContext ctx;
  b.Forward(x, &ctx);
  return ctx.madds();
}

}  // namespace

CheckResult CheckCostOracle(uint64_t seed, int cases) {
  Draw d(seed, "cost-oracle");
  std::vector<std::string> fail;
  for (int i = 0; i < cases; ++i) {
    BlockConfig mb = MakeMBBlockConfig(d.Int(1, 40), d.Int(1, 40),
                                       d.Pick(kExpansions), d.Pick(kKernels),
                                       d.Int(1, 2));
    const int64_t h = d.Int(3, 20), w = d.Int(3, 20);
    const uint64_t analytic = MaddsMBBlock(mb.in_channels, mb.out_channels,
                                           mb.expansion, mb.kernel, mb.stride,
                                           h, w);
    const uint64_t oracle = ExecutedMadds(mb, h, w, seed + i);
    if (analytic != oracle) {
      fail.push_back(mb.ToString() + " analytic " + std::to_string(analytic) +
                     " oracle " + std::to_string(oracle));
    }
  }
  for (int i = 0; i < cases; ++i) {
    BlockConfig c = RandomIdle(d, d.Coin() ? BlockKind::kIdleL : BlockKind::kIdleR);
    const int64_t h = d.Int(3, 20), w = d.Int(3, 20);
    const uint64_t analytic = MaddsIdleBlock(c.in_channels, c.expansion,
                                             c.kernel, 1, c.idle_alpha, h, w);
    const uint64_t oracle = ExecutedMadds(c, h, w, seed + 1000 + i);
    if (analytic != oracle) {
      fail.push_back(c.ToString() + " analytic " + std::to_string(analytic) +
                     " oracle " + std::to_string(oracle));
    }
  }
  return Result("cost-oracle", fail,
                std::to_string(2 * cases) + " blocks, analytic == 2 x MACs");
}

CheckResult CheckSavingsIdentity(uint64_t seed, int cases) {
  Draw d(seed, "savings");
  std::vector<std::string> fail;
  for (int i = 0; i < cases; ++i) {
    const int64_t c = d.Int(2, 64), k = d.Pick(kKernels), s = d.Int(1, 2);
    const double r = d.Pick(kExpansions), a = d.Pick(kAlphas);
    const int64_t h = d.Int(1, 64), w = d.Int(1, 64);
    const uint64_t mb = MaddsMBBlock(c, c, r, k, s, h, w);
    const uint64_t idle = MaddsIdleBlock(c, r, k, s, a, h, w);
    if (mb - idle != IdleSavings(c, r, a, h, w, s)) {
      fail.push_back("C=" + std::to_string(c) + " r=" + std::to_string(r) +
                     " alpha=" + std::to_string(a));
    }
  }
  struct Spot {
    const char* what;
    uint64_t got, want;
  } spots[] = {
      {"mbblock s1", MaddsMBBlock(16, 16, 6, 3, 1, 32, 32), 8060928},
      {"mbblock s2", MaddsMBBlock(16, 16, 6, 3, 2, 32, 32), 4374528},
      {"idle", MaddsIdleBlock(16, 6, 3, 1, 0.5, 32, 32), 4915200},
      {"savings", IdleSavings(16, 6, 0.5, 32, 32, 1), 3145728},
  };
  for (const Spot& s : spots) {
    if (s.got != s.want) {
      fail.push_back(std::string(s.what) + " spot " + std::to_string(s.got) +
                     " != " + std::to_string(s.want));
    }
  }
  return Result("savings-identity", fail,
                std::to_string(cases) + " draws + 4 spot values exact");
}

CheckResult CheckIdleIdentity(uint64_t seed, int cases) {
  Draw d(seed, "idle-identity");
  constexpr BlockKind kinds[] = {BlockKind::kIdleL, BlockKind::kIdleR,
                                 BlockKind::kISB};
  std::vector<std::string> fail;
  for (int i = 0; i < cases; ++i) {
    BlockConfig c = RandomIdle(d, d.Pick(kinds));
    c.se = d.Coin();
    c.active_residual = d.Coin();
    const Block b = BuildBlock(c, {seed + i, "idle."});
    const int64_t h = d.Int(2, 9), w = d.Int(2, 9), n = d.Int(1, 2);
    const Tensor4 x = RandomTensor({n, c.in_channels, h, w}, seed + i, "idle.x");
    const Tensor4 y = b.Forward(x);
    const ChannelRange idle = c.idle_range();
    bool ok = true;
    for (int64_t bn = 0; bn < n && ok; ++bn) {
      for (int64_t ch = idle.lo; ch < idle.hi && ok; ++ch) {
        const int64_t out = c.kind == BlockKind::kISB
                                ? ShuffledChannel(ch, c.in_channels, c.shuffle_groups)
                                : ch;
        ok = std::memcmp(x.plane(bn, ch), y.plane(bn, out),
                         sizeof(double) * h * w) == 0;
      }
    }
    if (!ok) fail.push_back(c.ToString() + ": idle channels altered");
  }
  return Result("idle-identity", fail,
                std::to_string(cases) + " IdleL/IdleR/ISB blocks bitwise");
}

CheckResult CheckShuffleInvolution(uint64_t seed) {
  std::vector<std::string> fail;
  int pairs = 0;
  for (int64_t c = 1; c <= 64; ++c) {
    const Tensor4 x = RandomTensor({2, c, 2, 3}, seed, "shuffle." + std::to_string(c));
    for (int64_t g = 1; g <= c; ++g) {
      if (c % g) continue;
      ++pairs;
      if (!ChannelShuffle(ChannelShuffle(x, g), c / g).BitwiseEquals(x)) {
        fail.push_back("C=" + std::to_string(c) + " g=" + std::to_string(g));
      }
    }
  }
  return Result("shuffle-involution", fail,
                std::to_string(pairs) + " (C, g) pairs with C <= 64");
}

CheckResult CheckReceptiveField(uint64_t seed, int stacks) {
  Draw d(seed, "rf");
  std::vector<std::string> fail;
  constexpr BlockKind kinds[] = {BlockKind::kMBBlock, BlockKind::kIdleL,
                                 BlockKind::kIdleR};
  constexpr double expansions[] = {1.0, 2.0};
  constexpr int64_t kernels[] = {3, 5};
  int64_t compared = 0;
  for (int i = 0; i < stacks; ++i) {
    NetworkSpec spec;
    spec.name = "rf-stack-" + std::to_string(i);
    spec.in_channels = 8;
    spec.in_height = spec.in_width = 21;
    spec.seed = seed + i;
    const int64_t depth = d.Int(1, 4);
    for (int64_t j = 0; j < depth; ++j) {
      BlockConfig b = MakeIdleConfig(d.Pick(kinds), 8, d.Pick(expansions),
                                     d.Pick(kernels), d.Pick(kAlphas));
      b.activation = Activation::kRelu;
      spec.blocks.push_back(b);
    }
    const RFComparison cmp = CompareRF(spec);
    compared += cmp.compared;
    if (!cmp.ok() || cmp.skipped) {
      fail.push_back(spec.name + ": " +
                     (cmp.ok() ? std::string("window skipped")
                               : cmp.disagreements.front()));
    }
  }

  auto fragment = [](BlockKind a, BlockKind b) {
    NetworkSpec s;
    s.in_channels = 8;
    s.in_height = s.in_width = 17;
    for (BlockKind k : {a, b}) s.blocks.push_back(MakeIdleConfig(k, 8, 2, 3, 0.5));
    return s;
  };
  auto expect = [&](const char* name, const NetworkSpec& s,
                    std::vector<int64_t> rfs) {
    const auto groups = PropagateRF(s).Groups();
    std::vector<int64_t> got;
    for (const auto& g : groups) got.push_back(g.rf);
    if (got != rfs) fail.push_back(std::string(name) + ": unexpected groups");
    const RFComparison cmp = CompareRF(s);
    if (!cmp.ok()) fail.push_back(std::string(name) + ": probe disagrees");
  };
  expect("two IdleR", fragment(BlockKind::kIdleR, BlockKind::kIdleR), {1, 5});
  expect("IdleR+IdleL", fragment(BlockKind::kIdleR, BlockKind::kIdleL), {3});

  return Result("receptive-field", fail,
                std::to_string(stacks) + " stacks, " + std::to_string(compared) +
                    " channels probe == analytic; (1,5) and (3,3) claims");
}

CheckResult CheckGradients(uint64_t seed) {
  std::vector<std::string> fail;
  double worst_op = 0.0, worst_block = 0.0;
  int n = 0;
  for (const auto& r : GradCheckAllOps(seed)) {
    ++n;
    worst_op = std::max(worst_op, r.max_rel_err());
    if (!r.pass()) fail.push_back(r.subject + " rel " + std::to_string(r.max_rel_err()));
  }
  for (const auto& r : GradCheckAllBlocks(seed)) {
    ++n;
    worst_block = std::max(worst_block, r.max_rel_err());
    if (!r.pass()) fail.push_back(r.subject + " rel " + std::to_string(r.max_rel_err()));
  }
  GradCheckOptions opts;
  opts.seed = seed;
  const Network toy = BuildNetwork(ToyHCSpec(seed));
  const GradCheckReport net = GradCheckNetwork(toy, {2, 1, kToySide, kToySide}, opts);
  ++n;
  worst_block = std::max(worst_block, net.max_rel_err());
  if (!net.pass()) fail.push_back("toy network rel " + std::to_string(net.max_rel_err()));

  char buf[128];
  std::snprintf(buf, sizeof buf,
                "%d checks; worst op %.2e (< 1e-6), worst block/net %.2e (< 1e-5)",
                n, worst_op, worst_block);
  return Result("gradients", fail, buf);
}

CheckResult CheckCostAdditivity(uint64_t seed) {
  Draw d(seed, "additivity");
  std::vector<std::string> fail;
  NetworkSpec base;
  base.name = "additivity-base";
  base.in_channels = 3;
  base.in_height = base.in_width = 32;
  base.stem = StemSpec{8, 3, 2, Activation::kHardSwish};
  int64_t c = 8;
  for (int i = 0; i < 6; ++i) {
    const int64_t out = c + 4 * d.Int(0, 2);
    BlockConfig b = MakeMBBlockConfig(c, out, d.Pick(kExpansions), d.Pick(kKernels),
                                      i % 3 == 1 ? 2 : 1);
    b.se = d.Coin();
    base.blocks.push_back(b);
    c = out;
  }
  base.head = HeadSpec{{32, 64}};
  base.classes = 10;

  constexpr HCMode modes[] = {HCMode::kMonotonicIdle, HCMode::kAlternatingLR};
  for (int trial = 0; trial < 5; ++trial) {
    HCPattern p;
    p.mode = d.Pick(modes);
    p.alpha = d.Pick(kAlphas);
    for (int64_t pos = 0; pos < 6; ++pos) {
      if (d.Coin()) p.insertions.push_back({pos, d.Int(1, 3)});
    }
    const NetworkSpec hc = ApplyHC(base, p);
    const CostReport base_cost = NetworkCost(base);
    const CostReport hc_cost = NetworkCost(hc);
    // Inserted blocks are the rows absent from the base.
    uint64_t inserted = 0;
    size_t bi = 0;
    for (size_t i = 0; i < hc.blocks.size(); ++i) {
      const CostRow& row = hc_cost.rows[i + 1];
      if (bi < base.blocks.size() && hc.blocks[i] == base.blocks[bi]) {
        ++bi;
      } else {
        inserted += row.analytic_madds;
      }
    }
    if (hc_cost.total_madds != base_cost.total_madds + inserted) {
      fail.push_back("trial " + std::to_string(trial) + ": HC != base + inserted");
    }
    const CostReport mono = NetworkCost(ReplaceIdleWithMB(hc));
    if (mono.total_madds - hc_cost.total_madds != hc_cost.savings_vs_monotonic ||
        (p.total() > 0 && !(hc_cost.total_madds < mono.total_madds))) {
      fail.push_back("trial " + std::to_string(trial) +
                     ": all-MBBlock difference != savings");
    }
  }
  return Result("cost-additivity", fail,
                "5 HC patterns: additive, and all-MBBlock gap == savings");
}

std::vector<CheckResult> RunInvariantBattery(uint64_t seed) {
  return {CheckCostOracle(seed),        CheckSavingsIdentity(seed),
          CheckIdleIdentity(seed),      CheckShuffleInvolution(seed),
          CheckReceptiveField(seed),    CheckGradients(seed),
          CheckCostAdditivity(seed)};
}

}  // namespace idlenet
