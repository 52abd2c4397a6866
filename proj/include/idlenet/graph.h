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

// A Graph is an ordered list of op nodes over numbered value slots. Slot 0 is
// the graph input; nodes are executed in insertion order, so the list is
// already a topological order. Parameters are owned by the graph and named.

#ifndef IDLENET_GRAPH_H_
#define IDLENET_GRAPH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idlenet/ops.h"
#include "idlenet/tensor.h"

namespace idlenet {

struct NamedTensor {
  std::string name;
  Tensor4 value;
};

enum class OpKind {
  kConv2d,
  kAffine,
  kActivation,
  kSplit,
  kConcat,
  kShuffle,
  kAdd,
  kGlobalAvgPool,
  kFlatten,
  kDense,
  kScaleChannels,
};

std::string_view OpKindName(OpKind kind);

struct Node {
  OpKind kind;
  std::string label;
  std::vector<int> inputs;
  std::vector<int> outputs;
  // Indices into Graph::params(): conv {weights}; affine {scale, bias};
  // dense {weights, bias}.
  std::vector<int> params;

  int64_t in_channels = 0;
  int64_t out_channels = 0;
  int64_t kernel = 1;
  int64_t stride = 1;
  int64_t groups = 1;  // conv groups or shuffle groups
  int64_t split_at = 0;
  Activation activation = Activation::kIdentity;
};

class Graph {
 public:
  // Values of every slot from one forward pass; consumed by Backward.
  struct Trace {
    std::vector<std::optional<Tensor4>> values;
  };
  struct Gradients {
    Tensor4 input;
    std::vector<Tensor4> params;  // same order as params()
  };

  static constexpr int kInputSlot = 0;

  // An empty graph is the identity map.
  Graph() = default;

  int output_slot() const { return output_slot_; }
  int num_slots() const { return num_slots_; }
  bool empty() const { return nodes_.empty(); }
  const std::vector<Node>& nodes() const { return nodes_; }

  const std::vector<NamedTensor>& params() const { return params_; }
  // Mutable access for training updates and test fixtures that install
  // hand-written weights. Shapes must be preserved.
  std::vector<NamedTensor>& mutable_params() { return params_; }
  const Tensor4& param(std::string_view name) const;
  Tensor4& mutable_param(std::string_view name);
  bool has_param(std::string_view name) const;
  int64_t ParamCount() const;

  Tensor4 Forward(const Tensor4& x, ExecContext* ctx = nullptr) const;
  Trace ForwardTraced(const Tensor4& x, ExecContext* ctx = nullptr) const;
  const Tensor4& TraceOutput(const Trace& trace) const;
  Gradients Backward(const Trace& trace, const Tensor4& cotangent) const;

  // Shape propagation and per-op closed-form MAC count, without execution.
  Shape4 OutputShape(const Shape4& input) const;
  uint64_t AnalyticMacs(const Shape4& input) const;

 private:
  friend class GraphBuilder;

  void RunNodes(std::vector<std::optional<Tensor4>>& values, ExecContext* ctx,
                bool keep_all) const;
  int ParamIndex(std::string_view name) const;

  std::vector<Node> nodes_;
  std::vector<NamedTensor> params_;
  int num_slots_ = 1;
  int output_slot_ = kInputSlot;
  // Last node index reading each slot; lets untraced forward free values.
  std::vector<int> last_use_;
};

// Builds a Graph; parameters are initialized as they are declared using the
// keyed generator from init.h, so the same (seed, prefix + name) always
// yields the same values regardless of construction order.
class GraphBuilder {
 public:
  GraphBuilder(std::string prefix, uint64_t seed);

  static constexpr int input() { return Graph::kInputSlot; }

  int Conv(int in, const std::string& name, int64_t in_channels,
           int64_t out_channels, int64_t kernel, int64_t stride,
           int64_t groups);
  // Per-channel affine: scale initialized to 1, bias to 0.
  int Affine(int in, const std::string& name, int64_t channels);
  int Act(int in, Activation activation);
  std::pair<int, int> Split(int in, int64_t at);
  int Concat(int a, int b);
  int Shuffle(int in, int64_t groups);
  int AddValues(int a, int b);
  int GlobalPool(int in);
  int FlattenValue(int in);
  int DenseLayer(int in, const std::string& name, int64_t in_features,
                 int64_t out_features);
  int Scale(int in, int gate);

  Graph Finish(int output) &&;

 private:
  int NewSlot() { return graph_.num_slots_++; }
  int AddParam(const std::string& name, Tensor4 value);
  int Emit(Node node, int outputs = 1);

  std::string prefix_;
  uint64_t seed_;
  Graph graph_;
};

}  // namespace idlenet

#endif  // IDLENET_GRAPH_H_
