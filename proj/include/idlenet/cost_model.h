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

// Closed-form multiply-add and parameter counts.
//
// Convention: one MAdd = one multiply + one add, so MAdds = 2 * MACs.
// Activations, per-channel affine, residual adds and the SE gate multiply
// count zero; SE dense layers count. Spatial sizes after a stride s are
// ceil(h / s).

#ifndef IDLENET_COST_MODEL_H_
#define IDLENET_COST_MODEL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "idlenet/block.h"
#include "idlenet/network.h"

namespace idlenet {

// Inverted residual: expand cin -> e = round(r * cin), depthwise k x k with
// stride s, project e -> cout, plus squeeze-excitation when se is set.
uint64_t MaddsMBBlock(int64_t cin, int64_t cout, double r, int64_t k,
                      int64_t s, int64_t h, int64_t w, bool se = false,
                      int64_t se_reduction = 4);
// Idle variant: both pointwise convs run on C - floor(alpha * C) channels; the
// depthwise stays at full width e = round(r * C).
uint64_t MaddsIdleBlock(int64_t c, double r, int64_t k, int64_t s,
                        double alpha, int64_t h, int64_t w, bool se = false,
                        int64_t se_reduction = 4);
// MaddsMBBlock(C, C, ...) - MaddsIdleBlock(C, ...), in integer arithmetic.
uint64_t IdleSavings(int64_t c, double r, double alpha, int64_t h, int64_t w,
                     int64_t s);

// Closed form for any block kind at input size h x w.
uint64_t BlockMadds(const BlockConfig& cfg, int64_t h, int64_t w);
int64_t BlockParams(const BlockConfig& cfg);

// 2 x the per-op MAC closed form summed over a built graph.
uint64_t MaddsGeneric(const Graph& graph, const Shape4& input);

struct CostRow {
  std::string index;  // "stem", block number, or "head"
  std::string kind;
  uint64_t analytic_madds = 0;
  int64_t analytic_params = 0;
  std::optional<uint64_t> oracle_madds;
  std::optional<int64_t> built_params;
};

struct CostReport {
  std::string name;
  int64_t height = 0;
  int64_t width = 0;
  std::vector<CostRow> rows;
  uint64_t total_madds = 0;
  int64_t total_params = 0;
  std::optional<uint64_t> total_oracle_madds;
  // Sum of IdleSavings over idle blocks: cost avoided relative to the same
  // network with every idle block replaced by an MBBlock.
  uint64_t savings_vs_monotonic = 0;
  // Rows whose oracle or built parameter count disagreed with the closed form.
  std::vector<std::string> mismatches;

  bool verified() const { return total_oracle_madds.has_value(); }
  bool ok() const { return mismatches.empty(); }
  // Multiply-accumulates (MAdds / 2), the unit used by the published
  // MobileNet-style tables.
  double MacsMillions() const { return total_madds / 2.0 / 1e6; }
  double MaddsMillions() const { return total_madds / 1e6; }
  double ParamsMillions() const { return total_params / 1e6; }

  // Header index,kind,analytic_madds,analytic_params,oracle_madds; totals row
  // last. oracle_madds is empty when verification did not run.
  std::string ToCsv() const;
  std::string ToTable() const;
};

// h, w <= 0 means the spec's input size. With verify set, builds the network,
// runs one forward pass on a unit batch and compares every row's MAC counter
// and parameter count with the closed form.
CostReport NetworkCost(const NetworkSpec& spec, int64_t h = 0, int64_t w = 0,
                       bool verify = false);

}  // namespace idlenet

#endif  // IDLENET_COST_MODEL_H_
