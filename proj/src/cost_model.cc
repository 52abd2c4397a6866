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

#include "idlenet/cost_model.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "idlenet/init.h"

namespace idlenet {
namespace {

using u64 = uint64_t;

u64 U(int64_t v) { return static_cast<u64>(v); }

int64_t Expanded(int64_t c, double r) {
  return std::llround(r * static_cast<double>(c));
}

int64_t IdleCount(int64_t c, double alpha) {
  return static_cast<int64_t>(std::floor(static_cast<double>(c) * alpha + 1e-9));
}

// Two dense layers e -> q -> e on the pooled vector.
u64 SeMacs(int64_t e, int64_t reduction) {
  const int64_t q = std::max<int64_t>(1, e / reduction);
  return 2 * U(e) * U(q);
}

int64_t SeParams(int64_t e, int64_t reduction) {
  const int64_t q = std::max<int64_t>(1, e / reduction);
  return e * q + q + q * e + e;
}

// Pointwise in -> e, depthwise e (k, stride s), pointwise e -> out.
u64 InvertedMacs(int64_t in, int64_t e, int64_t out, int64_t k, int64_t s,
                 int64_t h, int64_t w) {
  const u64 hw = U(h) * U(w);
  const u64 ohw = U(ConvOutputSize(h, s)) * U(ConvOutputSize(w, s));
  return U(in) * U(e) * hw + U(e) * U(k * k) * ohw + U(e) * U(out) * ohw;
}

int64_t InvertedParams(int64_t in, int64_t e, int64_t out, int64_t k) {
  return in * e + 2 * e + e * k * k + 2 * e + e * out + 2 * out;
}

std::string Millions(u64 v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v / 1e6);
  return buf;
}

}  // namespace

uint64_t MaddsMBBlock(int64_t cin, int64_t cout, double r, int64_t k,
                      int64_t s, int64_t h, int64_t w, bool se,
                      int64_t se_reduction) {
  const int64_t e = Expanded(cin, r);
  u64 macs = InvertedMacs(cin, e, cout, k, s, h, w);
  if (se) macs += SeMacs(e, se_reduction);
  return 2 * macs;
}

uint64_t MaddsIdleBlock(int64_t c, double r, int64_t k, int64_t s,
                        double alpha, int64_t h, int64_t w, bool se,
                        int64_t se_reduction) {
  const int64_t e = Expanded(c, r);
  const int64_t active = c - IdleCount(c, alpha);
  u64 macs = InvertedMacs(active, e, active, k, s, h, w);
  if (se) macs += SeMacs(e, se_reduction);
  return 2 * macs;
}

uint64_t IdleSavings(int64_t c, double r, double alpha, int64_t h, int64_t w,
                     int64_t s) {
  const u64 e = U(Expanded(c, r));
  const u64 idle = U(IdleCount(c, alpha));
  const u64 hw = U(h) * U(w);
  const u64 ohw = U(ConvOutputSize(h, s)) * U(ConvOutputSize(w, s));
  return 2 * idle * e * (hw + ohw);
}

uint64_t BlockMadds(const BlockConfig& cfg, int64_t h, int64_t w) {
  const int64_t k = cfg.kernel, s = cfg.stride;
  switch (cfg.kind) {
    case BlockKind::kMBBlock:
      return MaddsMBBlock(cfg.in_channels, cfg.out_channels, cfg.expansion, k,
                          s, h, w, cfg.se, cfg.se_reduction);
    case BlockKind::kIdleL:
    case BlockKind::kIdleR:
    case BlockKind::kISB:
      return MaddsIdleBlock(cfg.in_channels, cfg.expansion, k, s,
                            cfg.idle_alpha, h, w, cfg.se, cfg.se_reduction);
    case BlockKind::kBottleneck: {
      // Full k x k conv in the middle instead of a depthwise one.
      const int64_t b = cfg.expanded_channels();
      const u64 hw = U(h) * U(w);
      const u64 ohw = U(ConvOutputSize(h, s)) * U(ConvOutputSize(w, s));
      return 2 * (U(cfg.in_channels) * U(b) * hw + U(b) * U(b * k * k) * ohw +
                  U(b) * U(cfg.out_channels) * ohw);
    }
    case BlockKind::kShuffleV1: {
      const int64_t b = cfg.expanded_channels(), g = cfg.shuffle_groups;
      return 2 * InvertedMacs(cfg.in_channels / g, b, 0, k, s, h, w) +
             2 * U(b / g) * U(cfg.out_channels) * U(ConvOutputSize(h, s)) *
                 U(ConvOutputSize(w, s));
    }
    case BlockKind::kShuffleV2: {
      const int64_t half = cfg.in_channels / 2;
      return 2 * InvertedMacs(half, half, half, k, 1, h, w);
    }
  }
  return 0;
}

int64_t BlockParams(const BlockConfig& cfg) {
  const int64_t k = cfg.kernel;
  const int64_t e = cfg.expanded_channels();
  const int64_t se = cfg.se ? SeParams(e, cfg.se_reduction) : 0;
  switch (cfg.kind) {
    case BlockKind::kMBBlock:
      return InvertedParams(cfg.in_channels, e, cfg.out_channels, k) + se;
    case BlockKind::kIdleL:
    case BlockKind::kIdleR:
    case BlockKind::kISB: {
      const int64_t a = cfg.active_channels();
      return InvertedParams(a, e, a, k) + se;
    }
    case BlockKind::kBottleneck:
      return cfg.in_channels * e + 2 * e + e * e * k * k + 2 * e +
             e * cfg.out_channels + 2 * cfg.out_channels;
    case BlockKind::kShuffleV1: {
      const int64_t g = cfg.shuffle_groups;
      return cfg.in_channels / g * e + 2 * e + e * k * k + 2 * e +
             e / g * cfg.out_channels + 2 * cfg.out_channels;
    }
    case BlockKind::kShuffleV2: {
      const int64_t half = cfg.in_channels / 2;
      return InvertedParams(half, half, half, k);
    }
  }
  return 0;
}

uint64_t MaddsGeneric(const Graph& graph, const Shape4& input) {
  return 2 * graph.AnalyticMacs(input);
}

std::string CostReport::ToCsv() const {
  std::ostringstream os;
  os << "index,kind,analytic_madds,analytic_params,oracle_madds\n";
  for (const CostRow& r : rows) {
    os << r.index << ',' << r.kind << ',' << r.analytic_madds << ','
       << r.analytic_params << ',';
    if (r.oracle_madds) os << *r.oracle_madds;
    os << '\n';
  }
  os << "total,," << total_madds << ',' << total_params << ',';
  if (total_oracle_madds) os << *total_oracle_madds;
  os << '\n';
  return os.str();
}

std::string CostReport::ToTable() const {
  std::ostringstream os;
  char line[160];
  os << (name.empty() ? "network" : name) << " @ " << height << "x" << width
     << "\n";
  std::snprintf(line, sizeof line, "%-6s %-11s %12s %12s %12s\n", "index",
                "kind", "MAdds(M)", "params", "oracle(M)");
  os << line;
  for (const CostRow& r : rows) {
    std::snprintf(line, sizeof line, "%-6s %-11s %12s %12lld %12s\n",
                  r.index.c_str(), r.kind.c_str(),
                  Millions(r.analytic_madds).c_str(),
                  static_cast<long long>(r.analytic_params),
                  r.oracle_madds ? Millions(*r.oracle_madds).c_str() : "-");
    os << line;
  }
  std::snprintf(line, sizeof line,
                "total: %.1f M MAdds (%.1f M multiply-accumulates), %.3f M "
                "params\n",
                MaddsMillions(), MacsMillions(), ParamsMillions());
  os << line;
  std::snprintf(line, sizeof line,
                "idle savings vs all-MBBlock: %.1f M MAdds\n",
                savings_vs_monotonic / 1e6);
  os << line;
  if (verified()) {
    os << (ok() ? "oracle: all rows match\n" : "oracle: MISMATCH\n");
    for (const auto& m : mismatches) os << "  " << m << "\n";
  }
  return os.str();
}

CostReport NetworkCost(const NetworkSpec& input_spec, int64_t h, int64_t w,
                       bool verify) {
  NetworkSpec spec = input_spec;
  if (h > 0) spec.in_height = h;
  if (w > 0) spec.in_width = w;
  spec.Validate();

  CostReport rep;
  rep.name = spec.name;
  rep.height = spec.in_height;
  rep.width = spec.in_width;

  int64_t ch = spec.in_channels, hh = spec.in_height, ww = spec.in_width;
  if (spec.stem) {
    const StemSpec& st = *spec.stem;
    const int64_t oh = ConvOutputSize(hh, st.stride);
    const int64_t ow = ConvOutputSize(ww, st.stride);
    CostRow r{"stem", "Stem"};
    r.analytic_madds =
        2 * U(ch) * U(st.out_channels) * U(st.kernel * st.kernel) * U(oh) * U(ow);
    r.analytic_params = ch * st.out_channels * st.kernel * st.kernel +
                        2 * st.out_channels;
    rep.rows.push_back(r);
    ch = st.out_channels;
    hh = oh;
    ww = ow;
  }
  for (size_t i = 0; i < spec.blocks.size(); ++i) {
    const BlockConfig& b = spec.blocks[i];
    CostRow r{std::to_string(i), std::string(BlockKindName(b.kind))};
    r.analytic_madds = BlockMadds(b, hh, ww);
    r.analytic_params = BlockParams(b);
    if (IsIdleKind(b.kind)) {
      rep.savings_vs_monotonic +=
          IdleSavings(b.in_channels, b.expansion, b.idle_alpha, hh, ww, b.stride);
    }
    rep.rows.push_back(r);
    ch = b.out_channels;
    hh = ConvOutputSize(hh, b.stride);
    ww = ConvOutputSize(ww, b.stride);
  }
  if (spec.head || spec.classes) {
    CostRow r{"head", "Head"};
    u64 macs = 0;
    int64_t params = 0;
    if (spec.head) {
      const auto& ws = spec.head->widths;
      macs += U(ch) * U(ws[0]) * U(hh) * U(ww);
      params += ch * ws[0] + 2 * ws[0];
      ch = ws[0];
      if (spec.head->pool == HeadPool::kFlatten) ch *= hh * ww;
      for (size_t i = 1; i < ws.size(); ++i) {
        macs += U(ch) * U(ws[i]);
        params += ch * ws[i] + ws[i];
        ch = ws[i];
      }
    }
    if (spec.classes) {
      macs += U(ch) * U(*spec.classes);
      params += ch * *spec.classes + *spec.classes;
    }
    r.analytic_madds = 2 * macs;
    r.analytic_params = params;
    rep.rows.push_back(r);
  }
  for (const CostRow& r : rep.rows) {
    rep.total_madds += r.analytic_madds;
    rep.total_params += r.analytic_params;
  }

  if (verify) {
    const Network net = BuildNetwork(spec);
    const Tensor4 x =
        RandomTensor(spec.InputShape(1), spec.seed, "cost.verify");
    size_t row = 0;
    auto record = [&](const Graph& g, const Tensor4& in) {
      ExecContext ctx;
      Tensor4 out = g.Forward(in, &ctx);
      CostRow& r = rep.rows[row++];
      r.oracle_madds = ctx.madds();
      r.built_params = g.ParamCount();
      if (*r.oracle_madds != r.analytic_madds) {
        rep.mismatches.push_back("row " + r.index + ": analytic " +
                                 std::to_string(r.analytic_madds) +
                                 " != oracle " +
                                 std::to_string(*r.oracle_madds));
      }
      if (*r.built_params != r.analytic_params) {
        rep.mismatches.push_back("row " + r.index + ": analytic params " +
                                 std::to_string(r.analytic_params) +
                                 " != built " +
                                 std::to_string(*r.built_params));
      }
      return out;
    };
    Tensor4 t = x;
    if (spec.stem) t = record(net.stem(), t);
    for (const Block& b : net.blocks()) t = record(b.graph, t);
    if (spec.head || spec.classes) t = record(net.head(), t);
    u64 total = 0;
    for (const CostRow& r : rep.rows) total += *r.oracle_madds;
    rep.total_oracle_madds = total;
  }
  return rep;
}

}  // namespace idlenet
