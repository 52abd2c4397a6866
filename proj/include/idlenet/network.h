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

// Declarative network specs (stem -> blocks -> head -> classifier), JSON
// loading, hybrid-composition insertion, and the built Network.
//
// Stem, head and classifier are optional so that block fragments can be
// described with the same schema. Head = 1x1 conv + affine + act on the last
// feature map, global average pool (or flatten), then one dense + act per
// further width.

#ifndef IDLENET_NETWORK_H_
#define IDLENET_NETWORK_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "idlenet/block.h"
#include "idlenet/graph.h"

namespace idlenet {

// Raised by spec loading; carries every violation found, not just the first.
class SpecError : public ConfigError {
 public:
  explicit SpecError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct StemSpec {
  int64_t out_channels = 16;
  int64_t kernel = 3;
  int64_t stride = 2;
  Activation activation = Activation::kHardSwish;
  bool operator==(const StemSpec&) const = default;
};

enum class HeadPool { kAverage, kFlatten };
std::string_view HeadPoolName(HeadPool pool);  // "avg", "flatten"

struct HeadSpec {
  std::vector<int64_t> widths;
  Activation activation = Activation::kHardSwish;
  // Flatten keeps spatial position, which position-dependent toy tasks need.
  HeadPool pool = HeadPool::kAverage;
  bool operator==(const HeadSpec&) const = default;
};

enum class HCMode { kMonotonicIdle, kAlternatingLR, kMonotonicMB };
std::string_view HCModeName(HCMode mode);
HCMode ParseHCMode(std::string_view name);

struct Insertion {
  int64_t position = 0;  // insert after base block `position` (0-based)
  int64_t count = 0;
  bool operator==(const Insertion&) const = default;
};

struct HCPattern {
  HCMode mode = HCMode::kMonotonicIdle;
  double alpha = 0.5;
  std::vector<Insertion> insertions;
  std::string base;  // informational: file the pattern was applied to
  int64_t total() const;
  bool operator==(const HCPattern&) const = default;
};

struct NetworkSpec {
  std::string name;
  int64_t in_channels = 3;
  int64_t in_height = 224;
  int64_t in_width = 224;
  std::optional<StemSpec> stem;
  std::vector<BlockConfig> blocks;
  std::optional<HeadSpec> head;
  std::optional<int64_t> classes;
  uint64_t seed = 0;
  std::optional<HCPattern> hc;

  Shape4 InputShape(int64_t n = 1) const {
    return {n, in_channels, in_height, in_width};
  }
  // Every violated constraint, each naming its location; empty when valid.
  std::vector<std::string> Violations() const;
  void Validate() const;  // throws SpecError
  int64_t CountKind(BlockKind kind) const;
  int64_t CountIdle() const;
  bool operator==(const NetworkSpec&) const = default;
};

NetworkSpec ParseSpec(const std::string& json_text,
                      const std::string& source = "<string>");
NetworkSpec LoadSpec(const std::string& path);
std::string SpecToJson(const NetworkSpec& spec);

// Inserts blocks after the given base positions. Inserted blocks copy the
// block they follow with C_in = C_out = that block's C_out and s = 1.
// Throws ConfigError on an out-of-range or repeated position.
NetworkSpec ApplyHC(const NetworkSpec& base, const HCPattern& pattern);
// Same depth, every idle block replaced by an MBBlock of identical (C, r, k).
NetworkSpec ReplaceIdleWithMB(const NetworkSpec& spec);

class Network {
 public:
  struct Trace {
    Graph::Trace stem;
    std::vector<Graph::Trace> blocks;
    Graph::Trace head;
  };
  struct Gradients {
    Tensor4 input;
    std::vector<Tensor4> params;  // same order as params()
  };

  const NetworkSpec& spec() const { return spec_; }
  const Graph& stem() const { return stem_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Graph& head() const { return head_; }

  Tensor4 Forward(const Tensor4& x, ExecContext* ctx = nullptr) const;
  Trace ForwardTraced(const Tensor4& x, ExecContext* ctx = nullptr) const;
  const Tensor4& TraceOutput(const Trace& trace) const;
  Gradients Backward(const Trace& trace, const Tensor4& cotangent) const;

  // Flat views over stem, block and head parameters, in that order.
  std::vector<const NamedTensor*> params() const;
  std::vector<NamedTensor*> mutable_params();
  int64_t ParamCount() const;

 private:
  friend Network BuildNetwork(const NetworkSpec& spec);
  void CheckInput(const Tensor4& x) const;

  NetworkSpec spec_;
  Graph stem_;
  std::vector<Block> blocks_;
  Graph head_;
};

// Validates, then initializes every parameter from spec.seed keyed by
// "stem.*", "blocks.<i>.*" and "head.*" names.
Network BuildNetwork(const NetworkSpec& spec);

}  // namespace idlenet

#endif  // IDLENET_NETWORK_H_
