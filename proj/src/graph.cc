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

#include "idlenet/graph.h"

#include <algorithm>
#include <span>

#include "idlenet/init.h"

namespace idlenet {
namespace {

std::span<const double> Flat(const Tensor4& t) { return t.data(); }

Tensor4 VectorTensor(const std::vector<double>& v) {
  return Tensor4(Shape4{static_cast<int64_t>(v.size()), 1, 1, 1}, v);
}

ConvGeometry GeometryOf(const Node& node) {
  return ConvGeometry{node.in_channels, node.out_channels, node.kernel,
                      node.stride, node.groups};
}

void Accumulate(std::optional<Tensor4>& slot, Tensor4 value) {
  if (!slot) {
    slot = std::move(value);
  } else {
    slot = Add(*slot, value);
  }
}

}  // namespace

std::string_view OpKindName(OpKind kind) {
  switch (kind) {
    case OpKind::kConv2d: return "conv2d";
    case OpKind::kAffine: return "affine";
    case OpKind::kActivation: return "activation";
    case OpKind::kSplit: return "split";
    case OpKind::kConcat: return "concat";
    case OpKind::kShuffle: return "shuffle";
    case OpKind::kAdd: return "add";
    case OpKind::kGlobalAvgPool: return "global_avg_pool";
    case OpKind::kFlatten: return "flatten";
    case OpKind::kDense: return "dense";
    case OpKind::kScaleChannels: return "scale_channels";
  }
  return "unknown";
}

int Graph::ParamIndex(std::string_view name) const {
  for (size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

bool Graph::has_param(std::string_view name) const {
  return ParamIndex(name) >= 0;
}

const Tensor4& Graph::param(std::string_view name) const {
  const int i = ParamIndex(name);
  if (i < 0) throw std::out_of_range("no parameter named " + std::string(name));
  return params_[i].value;
}

Tensor4& Graph::mutable_param(std::string_view name) {
  const int i = ParamIndex(name);
  if (i < 0) throw std::out_of_range("no parameter named " + std::string(name));
  return params_[i].value;
}

int64_t Graph::ParamCount() const {
  int64_t total = 0;
  for (const auto& p : params_) total += p.value.size();
  return total;
}

void Graph::RunNodes(std::vector<std::optional<Tensor4>>& values,
                     ExecContext* ctx, bool keep_all) const {
  for (size_t ni = 0; ni < nodes_.size(); ++ni) {
    const Node& node = nodes_[ni];
    auto in = [&](size_t i) -> const Tensor4& { return *values[node.inputs[i]]; };
    auto prm = [&](size_t i) -> const Tensor4& {
      return params_[node.params[i]].value;
    };
    switch (node.kind) {
      case OpKind::kConv2d:
        values[node.outputs[0]] = Conv2d(in(0), GeometryOf(node), prm(0), ctx);
        break;
      case OpKind::kAffine:
        values[node.outputs[0]] =
            AffineChannel(in(0), Flat(prm(0)), Flat(prm(1)));
        break;
      case OpKind::kActivation:
        values[node.outputs[0]] = ActivationOp(in(0), node.activation);
        break;
      case OpKind::kSplit: {
        auto [a, b] = SplitChannels(in(0), node.split_at);
        values[node.outputs[0]] = std::move(a);
        values[node.outputs[1]] = std::move(b);
        break;
      }
      case OpKind::kConcat:
        values[node.outputs[0]] = ConcatChannels(in(0), in(1));
        break;
      case OpKind::kShuffle:
        values[node.outputs[0]] = ChannelShuffle(in(0), node.groups);
        break;
      case OpKind::kAdd:
        values[node.outputs[0]] = Add(in(0), in(1));
        break;
      case OpKind::kGlobalAvgPool:
        values[node.outputs[0]] = GlobalAvgPool(in(0));
        break;
      case OpKind::kFlatten:
        values[node.outputs[0]] = Flatten(in(0));
        break;
      case OpKind::kDense:
        values[node.outputs[0]] = Dense(in(0), prm(0), Flat(prm(1)), ctx);
        break;
      case OpKind::kScaleChannels:
        values[node.outputs[0]] = ScaleChannels(in(0), in(1));
        break;
    }
    if (!keep_all) {
      for (int slot : node.inputs) {
        if (last_use_[slot] == static_cast<int>(ni) && slot != output_slot_) {
          values[slot].reset();
        }
      }
    }
  }
}

Tensor4 Graph::Forward(const Tensor4& x, ExecContext* ctx) const {
  if (nodes_.empty()) return x;
  std::vector<std::optional<Tensor4>> values(num_slots_);
  values[kInputSlot] = x;
  RunNodes(values, ctx, /*keep_all=*/false);
  return std::move(*values[output_slot_]);
}

Graph::Trace Graph::ForwardTraced(const Tensor4& x, ExecContext* ctx) const {
  Trace trace;
  trace.values.resize(num_slots_);
  trace.values[kInputSlot] = x;
  RunNodes(trace.values, ctx, /*keep_all=*/true);
  return trace;
}

const Tensor4& Graph::TraceOutput(const Trace& trace) const {
  return *trace.values[output_slot_];
}

Graph::Gradients Graph::Backward(const Trace& trace,
                                 const Tensor4& cotangent) const {
  const Tensor4& out = TraceOutput(trace);
  if (!(cotangent.shape() == out.shape())) {
    throw ShapeError("backward: cotangent " + cotangent.shape().ToString() +
                     " does not match output " + out.shape().ToString());
  }
  std::vector<std::optional<Tensor4>> grads(num_slots_);
  grads[output_slot_] = cotangent;
  std::vector<std::optional<Tensor4>> param_grads(params_.size());

  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const Node& node = *it;
    bool any = false;
    for (int o : node.outputs) any = any || grads[o].has_value();
    if (!any) continue;
    auto in = [&](size_t i) -> const Tensor4& {
      return *trace.values[node.inputs[i]];
    };
    auto prm = [&](size_t i) -> const Tensor4& {
      return params_[node.params[i]].value;
    };
    auto grad_out = [&](size_t i) -> Tensor4 {
      const int slot = node.outputs[i];
      if (grads[slot]) return *grads[slot];
      return Tensor4(trace.values[slot]->shape());
    };
    auto push = [&](size_t i, Tensor4 g) {
      Accumulate(grads[node.inputs[i]], std::move(g));
    };
    auto push_param = [&](size_t i, Tensor4 g) {
      Accumulate(param_grads[node.params[i]], std::move(g));
    };

    switch (node.kind) {
      case OpKind::kConv2d: {
        auto g = Conv2dVjp(in(0), GeometryOf(node), prm(0), grad_out(0));
        push(0, std::move(g.input));
        push_param(0, std::move(g.weights));
        break;
      }
      case OpKind::kAffine: {
        auto g = AffineChannelVjp(in(0), Flat(prm(0)), grad_out(0));
        push(0, std::move(g.input));
        push_param(0, VectorTensor(g.scale));
        push_param(1, VectorTensor(g.bias));
        break;
      }
      case OpKind::kActivation:
        push(0, ActivationVjp(in(0), node.activation, grad_out(0)));
        break;
      case OpKind::kSplit:
        push(0, SplitChannelsVjp(grad_out(0), grad_out(1)));
        break;
      case OpKind::kConcat: {
        auto [ga, gb] = ConcatChannelsVjp(grad_out(0), in(0).c());
        push(0, std::move(ga));
        push(1, std::move(gb));
        break;
      }
      case OpKind::kShuffle:
        push(0, ChannelShuffleVjp(grad_out(0), node.groups));
        break;
      case OpKind::kAdd: {
        Tensor4 g = grad_out(0);
        push(0, g);
        push(1, std::move(g));
        break;
      }
      case OpKind::kGlobalAvgPool:
        push(0, GlobalAvgPoolVjp(in(0).shape(), grad_out(0)));
        break;
      case OpKind::kFlatten:
        push(0, FlattenVjp(in(0).shape(), grad_out(0)));
        break;
      case OpKind::kDense: {
        auto g = DenseVjp(in(0), prm(0), grad_out(0));
        push(0, std::move(g.input));
        push_param(0, std::move(g.weights));
        push_param(1, VectorTensor(g.bias));
        break;
      }
      case OpKind::kScaleChannels: {
        auto [gx, ggate] = ScaleChannelsVjp(in(0), in(1), grad_out(0));
        push(0, std::move(gx));
        push(1, std::move(ggate));
        break;
      }
    }
  }

  Gradients result{grads[kInputSlot] ? std::move(*grads[kInputSlot])
                                     : Tensor4(trace.values[kInputSlot]->shape()),
                   {}};
  result.params.reserve(params_.size());
  for (size_t i = 0; i < params_.size(); ++i) {
    result.params.push_back(param_grads[i]
                                ? std::move(*param_grads[i])
                                : Tensor4(params_[i].value.shape()));
  }
  return result;
}

Shape4 Graph::OutputShape(const Shape4& input) const {
  std::vector<Shape4> shapes(num_slots_);
  shapes[kInputSlot] = input;
  for (const Node& node : nodes_) {
    const Shape4& s = shapes[node.inputs[0]];
    switch (node.kind) {
      case OpKind::kConv2d:
        shapes[node.outputs[0]] =
            Shape4{s.n, node.out_channels, ConvOutputSize(s.h, node.stride),
                   ConvOutputSize(s.w, node.stride)};
        break;
      case OpKind::kSplit:
        shapes[node.outputs[0]] = Shape4{s.n, node.split_at, s.h, s.w};
        shapes[node.outputs[1]] = Shape4{s.n, s.c - node.split_at, s.h, s.w};
        break;
      case OpKind::kConcat: {
        const Shape4& b = shapes[node.inputs[1]];
        shapes[node.outputs[0]] = Shape4{s.n, s.c + b.c, s.h, s.w};
        break;
      }
      case OpKind::kGlobalAvgPool:
        shapes[node.outputs[0]] = Shape4{s.n, s.c, 1, 1};
        break;
      case OpKind::kFlatten:
        shapes[node.outputs[0]] = Shape4{s.n, s.c * s.h * s.w, 1, 1};
        break;
      case OpKind::kDense:
        shapes[node.outputs[0]] = Shape4{s.n, node.out_channels, 1, 1};
        break;
      default:
        shapes[node.outputs[0]] = s;
        break;
    }
  }
  return shapes[output_slot_];
}

uint64_t Graph::AnalyticMacs(const Shape4& input) const {
  // Re-run shape propagation, summing the per-op closed forms.
  std::vector<Shape4> shapes(num_slots_);
  shapes[kInputSlot] = input;
  uint64_t macs = 0;
  for (const Node& node : nodes_) {
    const Shape4& s = shapes[node.inputs[0]];
    switch (node.kind) {
      case OpKind::kConv2d:
        macs += Conv2dMacs(s, node.out_channels, node.kernel, node.stride,
                           node.groups);
        shapes[node.outputs[0]] =
            Shape4{s.n, node.out_channels, ConvOutputSize(s.h, node.stride),
                   ConvOutputSize(s.w, node.stride)};
        break;
      case OpKind::kDense:
        macs += static_cast<uint64_t>(s.n) * node.in_channels *
                node.out_channels;
        shapes[node.outputs[0]] = Shape4{s.n, node.out_channels, 1, 1};
        break;
      case OpKind::kSplit:
        shapes[node.outputs[0]] = Shape4{s.n, node.split_at, s.h, s.w};
        shapes[node.outputs[1]] = Shape4{s.n, s.c - node.split_at, s.h, s.w};
        break;
      case OpKind::kConcat: {
        const Shape4& b = shapes[node.inputs[1]];
        shapes[node.outputs[0]] = Shape4{s.n, s.c + b.c, s.h, s.w};
        break;
      }
      case OpKind::kGlobalAvgPool:
        shapes[node.outputs[0]] = Shape4{s.n, s.c, 1, 1};
        break;
      case OpKind::kFlatten:
        shapes[node.outputs[0]] = Shape4{s.n, s.c * s.h * s.w, 1, 1};
        break;
      default:
        shapes[node.outputs[0]] = s;
        break;
    }
  }
  return macs;
}

GraphBuilder::GraphBuilder(std::string prefix, uint64_t seed)
    : prefix_(std::move(prefix)), seed_(seed) {}

int GraphBuilder::AddParam(const std::string& name, Tensor4 value) {
  graph_.params_.push_back({prefix_ + name, std::move(value)});
  return static_cast<int>(graph_.params_.size()) - 1;
}

int GraphBuilder::Emit(Node node, int outputs) {
  for (int i = 0; i < outputs; ++i) node.outputs.push_back(NewSlot());
  const int first = node.outputs[0];
  graph_.nodes_.push_back(std::move(node));
  return first;
}

int GraphBuilder::Conv(int in, const std::string& name, int64_t in_channels,
                       int64_t out_channels, int64_t kernel, int64_t stride,
                       int64_t groups) {
  ConvGeometry geom{in_channels, out_channels, kernel, stride, groups};
  const Shape4 wshape = geom.WeightShape();
  geom.Validate(wshape);
  const int64_t taps = kernel * kernel;
  const std::string pname = name + ".weight";
  Node node{.kind = OpKind::kConv2d, .label = prefix_ + name, .inputs = {in}};
  node.params = {AddParam(pname, GlorotUniform(wshape, (in_channels / groups) * taps,
                                               (out_channels / groups) * taps,
                                               seed_, prefix_ + pname))};
  node.in_channels = in_channels;
  node.out_channels = out_channels;
  node.kernel = kernel;
  node.stride = stride;
  node.groups = groups;
  return Emit(std::move(node));
}

int GraphBuilder::Affine(int in, const std::string& name, int64_t channels) {
  Node node{.kind = OpKind::kAffine, .label = prefix_ + name, .inputs = {in}};
  node.params = {
      AddParam(name + ".scale", Tensor4(Shape4{channels, 1, 1, 1}, 1.0)),
      AddParam(name + ".bias", Tensor4(Shape4{channels, 1, 1, 1}, 0.0))};
  node.in_channels = node.out_channels = channels;
  return Emit(std::move(node));
}

int GraphBuilder::Act(int in, Activation activation) {
  Node node{.kind = OpKind::kActivation,
            .label = std::string(ActivationName(activation)),
            .inputs = {in}};
  node.activation = activation;
  return Emit(std::move(node));
}

std::pair<int, int> GraphBuilder::Split(int in, int64_t at) {
  Node node{.kind = OpKind::kSplit, .label = "split", .inputs = {in}};
  node.split_at = at;
  const int first = Emit(std::move(node), 2);
  return {first, first + 1};
}

int GraphBuilder::Concat(int a, int b) {
  return Emit(Node{.kind = OpKind::kConcat, .label = "concat", .inputs = {a, b}});
}

int GraphBuilder::Shuffle(int in, int64_t groups) {
  Node node{.kind = OpKind::kShuffle, .label = "shuffle", .inputs = {in}};
  node.groups = groups;
  return Emit(std::move(node));
}

int GraphBuilder::AddValues(int a, int b) {
  return Emit(Node{.kind = OpKind::kAdd, .label = "add", .inputs = {a, b}});
}

int GraphBuilder::GlobalPool(int in) {
  return Emit(
      Node{.kind = OpKind::kGlobalAvgPool, .label = "pool", .inputs = {in}});
}

int GraphBuilder::FlattenValue(int in) {
  return Emit(Node{.kind = OpKind::kFlatten, .label = "flatten", .inputs = {in}});
}

int GraphBuilder::DenseLayer(int in, const std::string& name,
                             int64_t in_features, int64_t out_features) {
  const std::string wname = name + ".weight";
  Node node{.kind = OpKind::kDense, .label = prefix_ + name, .inputs = {in}};
  node.params = {
      AddParam(wname, GlorotUniform(Shape4{out_features, in_features, 1, 1},
                                    in_features, out_features, seed_,
                                    prefix_ + wname)),
      AddParam(name + ".bias", Tensor4(Shape4{out_features, 1, 1, 1}, 0.0))};
  node.in_channels = in_features;
  node.out_channels = out_features;
  return Emit(std::move(node));
}

int GraphBuilder::Scale(int in, int gate) {
  return Emit(Node{.kind = OpKind::kScaleChannels,
                   .label = "scale",
                   .inputs = {in, gate}});
}

Graph GraphBuilder::Finish(int output) && {
  graph_.output_slot_ = output;
  graph_.last_use_.assign(graph_.num_slots_, -1);
  for (size_t i = 0; i < graph_.nodes_.size(); ++i) {
    for (int slot : graph_.nodes_[i].inputs) {
      graph_.last_use_[slot] = static_cast<int>(i);
    }
  }
  return std::move(graph_);
}

}  // namespace idlenet
