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

// Minimal op set for depthwise-separable blocks. Every op is a pure function
// of its inputs; the paired *Vjp functions return exact reverse-mode
// derivatives given a cotangent of the op's output shape.

#ifndef IDLENET_OPS_H_
#define IDLENET_OPS_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "idlenet/tensor.h"

namespace idlenet {

// Instrumentation hook: accumulates multiply-accumulate operations executed by
// convolution, dense and squeeze-excitation layers. One context per execution.
class ExecContext {
 public:
  ExecContext() = default;
  explicit ExecContext(bool counting_enabled)
      : counting_enabled_(counting_enabled) {}

  void AddMacs(uint64_t macs) {
    if (counting_enabled_) mac_counter_ += macs;
  }
  uint64_t macs() const { return mac_counter_; }
  // MAdds convention: two operations per multiply-accumulate.
  uint64_t madds() const { return 2 * mac_counter_; }
  bool counting_enabled() const { return counting_enabled_; }
  void set_counting_enabled(bool on) { counting_enabled_ = on; }

 private:
  uint64_t mac_counter_ = 0;
  bool counting_enabled_ = true;
};

// Convolution hyperparameters. Padding is always (kernel - 1) / 2 with zero
// fill, so output spatial size is ceil(h / stride).
struct ConvGeometry {
  int64_t in_channels = 0;
  int64_t out_channels = 0;
  int64_t kernel = 1;
  int64_t stride = 1;
  int64_t groups = 1;

  int64_t padding() const { return (kernel - 1) / 2; }
  bool depthwise() const {
    return groups == in_channels && groups == out_channels;
  }
  // (out_channels, in_channels / groups, kernel, kernel).
  Shape4 WeightShape() const;
  // Throws ShapeError when the channel/group/kernel contract is violated.
  void Validate(const Shape4& weight_shape) const;
};

struct ConvParams : ConvGeometry {
  Tensor4 weights{Shape4{}};

  void Validate() const { ConvGeometry::Validate(weights.shape()); }
};

enum class Activation { kIdentity, kRelu, kRelu6, kHardSwish, kHardSigmoid };

std::string_view ActivationName(Activation a);
// Accepts "identity", "relu", "relu6", "hswish", "hsigmoid".
Activation ParseActivation(std::string_view name);

int64_t ConvOutputSize(int64_t in, int64_t stride);
// Closed-form MAC count of one conv2d call.
uint64_t Conv2dMacs(const Shape4& input, int64_t out_channels, int64_t kernel,
                    int64_t stride, int64_t groups);

Tensor4 Conv2d(const Tensor4& x, const ConvParams& p, ExecContext* ctx = nullptr);
Tensor4 Conv2d(const Tensor4& x, const ConvGeometry& g, const Tensor4& weights,
               ExecContext* ctx = nullptr);

struct Conv2dGrads {
  Tensor4 input;
  Tensor4 weights;
};
Conv2dGrads Conv2dVjp(const Tensor4& x, const ConvParams& p,
                      const Tensor4& cotangent);
Conv2dGrads Conv2dVjp(const Tensor4& x, const ConvGeometry& g,
                      const Tensor4& weights, const Tensor4& cotangent);

std::pair<Tensor4, Tensor4> SplitChannels(const Tensor4& x, int64_t at);
Tensor4 ConcatChannels(const Tensor4& a, const Tensor4& b);
// Adjoint of ConcatChannels: splits the cotangent back at a.c().
std::pair<Tensor4, Tensor4> ConcatChannelsVjp(const Tensor4& cotangent,
                                              int64_t a_channels);
// Adjoint of SplitChannels.
Tensor4 SplitChannelsVjp(const Tensor4& cotangent_a, const Tensor4& cotangent_b);

// Output position of input channel i under reshape(g, c/g) + transpose;
// C=6, g=2 yields order [0,3,1,4,2,5].
int64_t ShuffledChannel(int64_t channel, int64_t channels, int64_t groups);
Tensor4 ChannelShuffle(const Tensor4& x, int64_t groups);
Tensor4 ChannelShuffleVjp(const Tensor4& cotangent, int64_t groups);

Tensor4 AffineChannel(const Tensor4& x, std::span<const double> scale,
                      std::span<const double> bias);
struct AffineGrads {
  Tensor4 input;
  std::vector<double> scale;
  std::vector<double> bias;
};
AffineGrads AffineChannelVjp(const Tensor4& x, std::span<const double> scale,
                             const Tensor4& cotangent);

double ApplyActivation(Activation a, double v);
double ActivationDerivative(Activation a, double v);
// Index of the linear piece v falls in (breakpoints: relu 0; relu6 0, 6;
// hswish and hsigmoid -3, 3). Equal indices mean no kink lies between.
int ActivationPiece(Activation a, double v);
Tensor4 ActivationOp(const Tensor4& x, Activation kind);
Tensor4 ActivationVjp(const Tensor4& x, Activation kind,
                      const Tensor4& cotangent);

Tensor4 Add(const Tensor4& a, const Tensor4& b);

Tensor4 GlobalAvgPool(const Tensor4& x);
Tensor4 GlobalAvgPoolVjp(const Shape4& input_shape, const Tensor4& cotangent);

// (n, c, h, w) -> (n, c*h*w, 1, 1), same memory order.
Tensor4 Flatten(const Tensor4& x);
Tensor4 FlattenVjp(const Shape4& input_shape, const Tensor4& cotangent);

// x must be (n, in, 1, 1); weights (out, in, 1, 1); bias length out.
// Counts in * out MACs per batch row.
Tensor4 Dense(const Tensor4& x, const Tensor4& weights,
              std::span<const double> bias, ExecContext* ctx = nullptr);
struct DenseGrads {
  Tensor4 input;
  Tensor4 weights;
  std::vector<double> bias;
};
DenseGrads DenseVjp(const Tensor4& x, const Tensor4& weights,
                    const Tensor4& cotangent);

// y[n,c,:,:] = x[n,c,:,:] * gate[n,c]. gate is (n, c, 1, 1). Used for SE
// gating; contributes zero MACs by convention.
Tensor4 ScaleChannels(const Tensor4& x, const Tensor4& gate);
std::pair<Tensor4, Tensor4> ScaleChannelsVjp(const Tensor4& x,
                                             const Tensor4& gate,
                                             const Tensor4& cotangent);

}  // namespace idlenet

#endif  // IDLENET_OPS_H_
