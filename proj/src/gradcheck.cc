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

#include "idlenet/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "idlenet/init.h"

namespace idlenet {
namespace {

struct Target {
  std::string name;
  Tensor4* value;
  const Tensor4* grad;
};

// Output plus the linear piece of every activation input, so that a
// perturbation straddling a kink can be detected and skipped.
struct Evaluation {
  Tensor4 output;
  std::vector<int8_t> pieces;
};

// (sum p^2 - sum m^2) / (2 eps) evaluated term by term: outputs the
// perturbation does not reach cancel exactly instead of leaving round-off at
// the scale of the whole loss.
double CentralDifference(const Tensor4& plus, const Tensor4& minus, double eps) {
  const auto p = plus.data(), m = minus.data();
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) acc += (p[i] - m[i]) * (p[i] + m[i]);
  return acc / (2.0 * eps);
}

Tensor4 TwiceOf(const Tensor4& y) {
  Tensor4 g = y;
  for (double& v : g.mutable_data()) v *= 2.0;
  return g;
}

void AppendPieces(const Graph& g, const Graph::Trace& trace,
                  std::vector<int8_t>& pieces) {
  for (const Node& node : g.nodes()) {
    if (node.kind != OpKind::kActivation) continue;
    for (double v : trace.values[node.inputs[0]]->data()) {
      pieces.push_back(static_cast<int8_t>(ActivationPiece(node.activation, v)));
    }
  }
}

// Keyed lazy Fisher-Yates over entry indices.
class EntryOrder {
 public:
  EntryOrder(int64_t size, uint64_t seed, const std::string& name)
      : idx_(size), rng_(seed, "gradcheck/" + name) {
    std::iota(idx_.begin(), idx_.end(), 0);
  }
  bool Next(int64_t* out) {
    const int64_t n = static_cast<int64_t>(idx_.size());
    if (pos_ >= n) return false;
    const int64_t j = pos_ + static_cast<int64_t>(rng_.Bits(pos_) % (n - pos_));
    std::swap(idx_[pos_], idx_[j]);
    *out = idx_[pos_++];
    return true;
  }

 private:
  std::vector<int64_t> idx_;
  CounterRng rng_;
  int64_t pos_ = 0;
};

void CheckTargets(const std::vector<Target>& targets,
                  const std::function<Evaluation()>& eval,
                  const GradCheckOptions& opts, GradCheckReport& report) {
  const std::vector<int8_t> base = eval().pieces;
  for (const Target& t : targets) {
    TensorCheck tc{t.name};
    auto data = t.value->mutable_data();
    const auto grad = t.grad->data();
    const int64_t want = std::min<int64_t>(opts.samples, t.value->size());
    EntryOrder order(t.value->size(), opts.seed, t.name);
    int64_t i;
    while (tc.checked_entries < want && order.Next(&i)) {
      const double saved = data[i];
      data[i] = saved + opts.eps;
      const Evaluation plus = eval();
      data[i] = saved - opts.eps;
      const Evaluation minus = eval();
      data[i] = saved;
      if (plus.pieces != base || minus.pieces != base) {
        ++tc.skipped_at_kink;
        continue;
      }
      const double numeric = CentralDifference(plus.output, minus.output, opts.eps);
      const double abs_err = std::abs(grad[i] - numeric);
      const double denom = std::max(
          {std::abs(grad[i]), std::abs(numeric), opts.denominator_floor});
      tc.max_abs_err = std::max(tc.max_abs_err, abs_err);
      tc.max_rel_err = std::max(tc.max_rel_err, abs_err / denom);
      ++tc.checked_entries;
    }
    report.tensors.push_back(tc);
  }
}

void Randomize(Graph& g, uint64_t seed) {
  for (NamedTensor& p : g.mutable_params()) {
    p.value = RandomTensor(p.value.shape(), seed, "param/" + p.name, -1.0, 1.0);
  }
}

// Default affine init (scale 1, bias 0) places exact zeros from a ReLU right
// on the next ReLU's kink, where the two-sided difference is meaningless.
// Moving scale and bias off their defaults gives a generic evaluation point.
void PerturbAffine(Graph& g, uint64_t seed) {
  for (NamedTensor& p : g.mutable_params()) {
    if (p.name.ends_with(".scale")) {
      p.value = RandomTensor(p.value.shape(), seed, "param/" + p.name, 0.5, 1.5);
    } else if (p.name.ends_with(".bias")) {
      p.value = RandomTensor(p.value.shape(), seed, "param/" + p.name, -0.5, 0.5);
    }
  }
}

}  // namespace

double GradCheckReport::max_rel_err() const {
  double m = 0.0;
  for (const auto& t : tensors) m = std::max(m, t.max_rel_err);
  return m;
}

std::string GradCheckReport::ToString() const {
  std::ostringstream os;
  os << subject << ": max_rel_err=" << max_rel_err() << " tol=" << tolerance
     << (pass() ? " PASS" : " FAIL") << "\n";
  for (const auto& t : tensors) {
    os << "  " << t.name << " n=" << t.checked_entries;
    if (t.skipped_at_kink) os << " kink_skips=" << t.skipped_at_kink;
    os
       << " rel=" << t.max_rel_err << " abs=" << t.max_abs_err << "\n";
  }
  return os.str();
}

GradCheckReport GradCheckGraph(const Graph& graph, const Tensor4& x,
                               const GradCheckOptions& opts,
                               const std::string& subject) {
  Graph g = graph;
  Tensor4 input = x;
  const Graph::Trace trace = g.ForwardTraced(input);
  const Graph::Gradients grads =
      g.Backward(trace, TwiceOf(g.TraceOutput(trace)));

  GradCheckReport report{subject, opts.tolerance, {}};
  std::vector<Target> targets{{"input", &input, &grads.input}};
  auto& params = g.mutable_params();
  for (size_t i = 0; i < params.size(); ++i) {
    targets.push_back({params[i].name, &params[i].value, &grads.params[i]});
  }
  CheckTargets(
      targets,
      [&] {
        const Graph::Trace tr = g.ForwardTraced(input);
        Evaluation e{g.TraceOutput(tr), {}};
        AppendPieces(g, tr, e.pieces);
        return e;
      },
      opts, report);
  return report;
}

GradCheckReport GradCheckBlock(const Block& block, const Shape4& input,
                               const GradCheckOptions& opts) {
  const Tensor4 x = RandomTensor(input, opts.seed, "gradcheck/input");
  return GradCheckGraph(block.graph, x, opts, block.config.ToString());
}

GradCheckReport GradCheckNetwork(const Network& net, const Shape4& input,
                                 const GradCheckOptions& opts) {
  Network n = net;
  Tensor4 x = RandomTensor(input, opts.seed, "gradcheck/input");
  const Network::Trace trace = n.ForwardTraced(x);
  const Network::Gradients grads =
      n.Backward(trace, TwiceOf(n.TraceOutput(trace)));

  GradCheckReport report{
      net.spec().name.empty() ? "network" : net.spec().name, opts.tolerance,
      {}};
  std::vector<Target> targets{{"input", &x, &grads.input}};
  const auto params = n.mutable_params();
  for (size_t i = 0; i < params.size(); ++i) {
    targets.push_back({params[i]->name, &params[i]->value, &grads.params[i]});
  }
  CheckTargets(
      targets,
      [&] {
        const Network::Trace tr = n.ForwardTraced(x);
        Evaluation e{n.TraceOutput(tr), {}};
        AppendPieces(n.stem(), tr.stem, e.pieces);
        for (size_t b = 0; b < tr.blocks.size(); ++b) {
          AppendPieces(n.blocks()[b].graph, tr.blocks[b], e.pieces);
        }
        AppendPieces(n.head(), tr.head, e.pieces);
        return e;
      },
      opts, report);
  return report;
}

std::vector<GradCheckReport> GradCheckAllOps(uint64_t seed) {
  GradCheckOptions opts;
  opts.seed = seed;
  opts.tolerance = kOpGradTolerance;

  std::vector<GradCheckReport> reports;
  auto run = [&](const std::string& name, const Shape4& shape,
                 const std::function<int(GraphBuilder&)>& body,
                 double lo = -1.0, double hi = 1.0) {
    GraphBuilder b("op.", seed);
    const int out = body(b);
    Graph g = std::move(b).Finish(out);
    Randomize(g, seed);
    const Tensor4 x = RandomTensor(shape, seed, "gradcheck/" + name, lo, hi);
    reports.push_back(GradCheckGraph(g, x, opts, name));
  };
  const int in = GraphBuilder::input();
  const Shape4 s4{2, 4, 5, 5};

  run("conv1x1", s4, [&](GraphBuilder& b) { return b.Conv(in, "w", 4, 6, 1, 1, 1); });
  run("conv3x3", s4, [&](GraphBuilder& b) { return b.Conv(in, "w", 4, 6, 3, 1, 1); });
  run("conv3x3_grouped", s4,
      [&](GraphBuilder& b) { return b.Conv(in, "w", 4, 6, 3, 1, 2); });
  run("conv3x3_depthwise", s4,
      [&](GraphBuilder& b) { return b.Conv(in, "w", 4, 4, 3, 1, 4); });
  run("conv3x3_stride2", Shape4{2, 4, 7, 7},
      [&](GraphBuilder& b) { return b.Conv(in, "w", 4, 6, 3, 2, 1); });
  run("conv5x5_depthwise_stride2", Shape4{1, 4, 8, 8},
      [&](GraphBuilder& b) { return b.Conv(in, "w", 4, 4, 5, 2, 4); });
  run("affine", s4, [&](GraphBuilder& b) { return b.Affine(in, "bn", 4); });
  for (Activation a : {Activation::kIdentity, Activation::kRelu,
                       Activation::kRelu6, Activation::kHardSwish,
                       Activation::kHardSigmoid}) {
    // Range covers every linear piece, including relu6's upper clamp.
    run("act_" + std::string(ActivationName(a)), s4,
        [&](GraphBuilder& b) { return b.Act(in, a); }, -4.5, 7.5);
  }
  run("split_concat", s4, [&](GraphBuilder& b) {
    auto [lo, hi] = b.Split(in, 1);
    return b.Concat(hi, lo);
  });
  run("shuffle_g2", Shape4{2, 6, 3, 3}, [&](GraphBuilder& b) { return b.Shuffle(in, 2); });
  run("shuffle_g3", Shape4{2, 6, 3, 3}, [&](GraphBuilder& b) { return b.Shuffle(in, 3); });
  run("add", s4, [&](GraphBuilder& b) {
    auto [lo, hi] = b.Split(in, 2);
    return b.AddValues(lo, hi);
  });
  run("global_avg_pool", s4, [&](GraphBuilder& b) { return b.GlobalPool(in); });
  run("flatten", s4, [&](GraphBuilder& b) { return b.FlattenValue(in); });
  run("dense", Shape4{3, 5, 1, 1},
      [&](GraphBuilder& b) { return b.DenseLayer(in, "fc", 5, 4); });
  run("scale_channels", s4, [&](GraphBuilder& b) {
    return b.Scale(in, b.GlobalPool(in));
  });
  return reports;
}

std::vector<GradCheckReport> GradCheckAllBlocks(uint64_t seed) {
  GradCheckOptions opts;
  opts.seed = seed;
  opts.tolerance = kBlockGradTolerance;

  std::vector<std::pair<BlockConfig, Shape4>> cases;
  cases.push_back({MakeMBBlockConfig(4, 4, 2, 3, 1), {1, 4, 6, 6}});
  {
    BlockConfig c = MakeMBBlockConfig(4, 6, 3, 5, 2);
    c.se = true;
    c.activation = Activation::kHardSwish;
    cases.push_back({c, {2, 4, 7, 7}});
  }
  for (BlockKind k : {BlockKind::kIdleL, BlockKind::kIdleR, BlockKind::kISB}) {
    BlockConfig c = MakeIdleConfig(k, 8, 2, 3, 0.5);
    cases.push_back({c, {1, 8, 6, 6}});
  }
  {
    BlockConfig c = MakeIdleConfig(BlockKind::kIdleR, 6, 2, 3, 0.5);
    c.se = true;
    c.activation = Activation::kHardSwish;
    cases.push_back({c, {1, 6, 5, 5}});
  }
  {
    BlockConfig c = MakeMBBlockConfig(8, 8, 2, 3, 1);
    c.kind = BlockKind::kBottleneck;
    cases.push_back({c, {1, 8, 6, 6}});
  }
  {
    BlockConfig c = MakeMBBlockConfig(8, 8, 2, 3, 1);
    c.kind = BlockKind::kShuffleV1;
    cases.push_back({c, {1, 8, 6, 6}});
  }
  {
    BlockConfig c = MakeMBBlockConfig(8, 8, 1, 3, 1);
    c.kind = BlockKind::kShuffleV2;
    cases.push_back({c, {1, 8, 6, 6}});
  }

  std::vector<GradCheckReport> reports;
  for (const auto& [cfg, shape] : cases) {
    Block b = BuildBlock(cfg, BuildOptions{seed, "gc."});
    PerturbAffine(b.graph, seed);
    reports.push_back(GradCheckBlock(b, shape, opts));
  }
  return reports;
}

}  // namespace idlenet
