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

#include "idlenet/ops.h"

#include <algorithm>
#include <string>

#include "idlenet/parallel.h"

namespace idlenet {
namespace {

std::string Str(int64_t v) { return std::to_string(v); }

void RequireSameShape(const Tensor4& a, const Tensor4& b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     a.shape().ToString() + " vs " + b.shape().ToString());
  }
}

}  // namespace

Shape4 ConvGeometry::WeightShape() const {
  return Shape4{out_channels, in_channels / std::max<int64_t>(groups, 1),
                kernel, kernel};
}

void ConvGeometry::Validate(const Shape4& weight_shape) const {
  if (in_channels < 1 || out_channels < 1 || groups < 1 || stride < 1) {
    throw ShapeError("conv2d: channels, groups and stride must be positive");
  }
  if (kernel < 1 || kernel % 2 == 0) {
    throw ShapeError("conv2d: kernel must be odd, got " + Str(kernel));
  }
  if (in_channels % groups != 0 || out_channels % groups != 0) {
    throw ShapeError("conv2d: groups " + Str(groups) + " must divide in " +
                     Str(in_channels) + " and out " + Str(out_channels));
  }
  const Shape4 want = WeightShape();
  if (!(weight_shape == want)) {
    throw ShapeError("conv2d: weights " + weight_shape.ToString() +
                     ", expected " + want.ToString());
  }
}

std::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kRelu6: return "relu6";
    case Activation::kHardSwish: return "hswish";
    case Activation::kHardSigmoid: return "hsigmoid";
  }
  return "identity";
}

Activation ParseActivation(std::string_view name) {
  for (Activation a : {Activation::kIdentity, Activation::kRelu,
                       Activation::kRelu6, Activation::kHardSwish,
                       Activation::kHardSigmoid}) {
    if (ActivationName(a) == name) return a;
  }
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

int64_t ConvOutputSize(int64_t in, int64_t stride) {
  return (in + stride - 1) / stride;
}

uint64_t Conv2dMacs(const Shape4& input, int64_t out_channels, int64_t kernel,
                    int64_t stride, int64_t groups) {
  const int64_t ho = ConvOutputSize(input.h, stride);
  const int64_t wo = ConvOutputSize(input.w, stride);
  return static_cast<uint64_t>(input.n) * out_channels * ho * wo *
         (input.c / groups) * kernel * kernel;
}

Tensor4 Conv2d(const Tensor4& x, const ConvParams& p, ExecContext* ctx) {
  return Conv2d(x, static_cast<const ConvGeometry&>(p), p.weights, ctx);
}

Tensor4 Conv2d(const Tensor4& x, const ConvGeometry& p, const Tensor4& weights,
               ExecContext* ctx) {
  p.Validate(weights.shape());
  if (x.c() != p.in_channels) {
    throw ShapeError("conv2d: input has " + Str(x.c()) + " channels, expected " +
                     Str(p.in_channels));
  }
  const int64_t k = p.kernel, s = p.stride, pad = p.padding();
  const int64_t h = x.h(), w = x.w();
  const int64_t ho = ConvOutputSize(h, s), wo = ConvOutputSize(w, s);
  const int64_t cin_g = p.in_channels / p.groups;
  const int64_t cout_g = p.out_channels / p.groups;
  Tensor4 y(Shape4{x.n(), p.out_channels, ho, wo});

  // One work item per output plane. Reduction order per output element is
  // input channel, then kernel row, then kernel column.
  ParallelFor(x.n() * p.out_channels, [&](int64_t item) {
    const int64_t n = item / p.out_channels;
    const int64_t oc = item % p.out_channels;
    const int64_t g = oc / cout_g;
    double* out = y.plane(n, oc);
    for (int64_t icg = 0; icg < cin_g; ++icg) {
      const double* in = x.plane(n, g * cin_g + icg);
      for (int64_t ky = 0; ky < k; ++ky) {
        for (int64_t kx = 0; kx < k; ++kx) {
          const double wv = weights.at(oc, icg, ky, kx);
          for (int64_t oy = 0; oy < ho; ++oy) {
            const int64_t iy = oy * s + ky - pad;
            if (iy < 0 || iy >= h) continue;
            const double* in_row = in + iy * w;
            double* out_row = out + oy * wo;
            for (int64_t ox = 0; ox < wo; ++ox) {
              const int64_t ix = ox * s + kx - pad;
              if (ix < 0 || ix >= w) continue;
              out_row[ox] += wv * in_row[ix];
            }
          }
        }
      }
    }
  });
  // Counted from the executed tensors: every output element reduces over
  // one filter of weights.c() * k * k taps.
  if (ctx) {
    ctx->AddMacs(static_cast<uint64_t>(y.size()) *
                 static_cast<uint64_t>(weights.c() * k * k));
  }
  return y;
}

Conv2dGrads Conv2dVjp(const Tensor4& x, const ConvParams& p,
                      const Tensor4& cotangent) {
  return Conv2dVjp(x, static_cast<const ConvGeometry&>(p), p.weights,
                   cotangent);
}

Conv2dGrads Conv2dVjp(const Tensor4& x, const ConvGeometry& p,
                      const Tensor4& weights, const Tensor4& cotangent) {
  p.Validate(weights.shape());
  if (x.c() != p.in_channels) throw ShapeError("conv2d vjp: input channels");
  const int64_t k = p.kernel, s = p.stride, pad = p.padding();
  const int64_t h = x.h(), w = x.w();
  const int64_t ho = ConvOutputSize(h, s), wo = ConvOutputSize(w, s);
  const Shape4 out_shape{x.n(), p.out_channels, ho, wo};
  if (!(cotangent.shape() == out_shape)) {
    throw ShapeError("conv2d vjp: cotangent " + cotangent.shape().ToString() +
                     ", expected " + out_shape.ToString());
  }
  const int64_t cin_g = p.in_channels / p.groups;
  const int64_t cout_g = p.out_channels / p.groups;

  Conv2dGrads grads{Tensor4(x.shape()), Tensor4(weights.shape())};

  // Input gradient: transposed correlation, one item per input plane.
  ParallelFor(x.n() * p.in_channels, [&](int64_t item) {
    const int64_t n = item / p.in_channels;
    const int64_t ic = item % p.in_channels;
    const int64_t g = ic / cin_g;
    const int64_t icg = ic % cin_g;
    double* dx = grads.input.plane(n, ic);
    for (int64_t ocg = 0; ocg < cout_g; ++ocg) {
      const int64_t oc = g * cout_g + ocg;
      const double* u = cotangent.plane(n, oc);
      for (int64_t ky = 0; ky < k; ++ky) {
        for (int64_t kx = 0; kx < k; ++kx) {
          const double wv = weights.at(oc, icg, ky, kx);
          for (int64_t oy = 0; oy < ho; ++oy) {
            const int64_t iy = oy * s + ky - pad;
            if (iy < 0 || iy >= h) continue;
            for (int64_t ox = 0; ox < wo; ++ox) {
              const int64_t ix = ox * s + kx - pad;
              if (ix < 0 || ix >= w) continue;
              dx[iy * w + ix] += wv * u[oy * wo + ox];
            }
          }
        }
      }
    }
  });

  // Weight gradient: correlation of input with cotangent, one item per filter.
  ParallelFor(p.out_channels, [&](int64_t oc) {
    const int64_t g = oc / cout_g;
    for (int64_t icg = 0; icg < cin_g; ++icg) {
      for (int64_t ky = 0; ky < k; ++ky) {
        for (int64_t kx = 0; kx < k; ++kx) {
          double acc = 0.0;
          for (int64_t n = 0; n < x.n(); ++n) {
            const double* in = x.plane(n, g * cin_g + icg);
            const double* u = cotangent.plane(n, oc);
            for (int64_t oy = 0; oy < ho; ++oy) {
              const int64_t iy = oy * s + ky - pad;
              if (iy < 0 || iy >= h) continue;
              for (int64_t ox = 0; ox < wo; ++ox) {
                const int64_t ix = ox * s + kx - pad;
                if (ix < 0 || ix >= w) continue;
                acc += u[oy * wo + ox] * in[iy * w + ix];
              }
            }
          }
          grads.weights.at(oc, icg, ky, kx) = acc;
        }
      }
    }
  });
  return grads;
}

std::pair<Tensor4, Tensor4> SplitChannels(const Tensor4& x, int64_t at) {
  if (at <= 0 || at >= x.c()) {
    throw ShapeError("split_channels: split point " + Str(at) +
                     " out of range (0, " + Str(x.c()) + ")");
  }
  Tensor4 a(Shape4{x.n(), at, x.h(), x.w()});
  Tensor4 b(Shape4{x.n(), x.c() - at, x.h(), x.w()});
  const int64_t plane = x.shape().plane();
  for (int64_t n = 0; n < x.n(); ++n) {
    std::copy_n(x.plane(n, 0), at * plane, a.plane(n, 0));
    std::copy_n(x.plane(n, at), (x.c() - at) * plane, b.plane(n, 0));
  }
  return {std::move(a), std::move(b)};
}

Tensor4 ConcatChannels(const Tensor4& a, const Tensor4& b) {
  if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) {
    throw ShapeError("concat_channels: batch/spatial mismatch " +
                     a.shape().ToString() + " vs " + b.shape().ToString());
  }
  Tensor4 y(Shape4{a.n(), a.c() + b.c(), a.h(), a.w()});
  const int64_t plane = a.shape().plane();
  for (int64_t n = 0; n < a.n(); ++n) {
    std::copy_n(a.plane(n, 0), a.c() * plane, y.plane(n, 0));
    std::copy_n(b.plane(n, 0), b.c() * plane, y.plane(n, a.c()));
  }
  return y;
}

std::pair<Tensor4, Tensor4> ConcatChannelsVjp(const Tensor4& cotangent,
                                              int64_t a_channels) {
  return SplitChannels(cotangent, a_channels);
}

Tensor4 SplitChannelsVjp(const Tensor4& cotangent_a,
                         const Tensor4& cotangent_b) {
  return ConcatChannels(cotangent_a, cotangent_b);
}

int64_t ShuffledChannel(int64_t channel, int64_t channels, int64_t groups) {
  // reshape (g, c/g) then transpose: input a*(c/g)+b lands at b*g+a.
  const int64_t per = channels / groups;
  return (channel % per) * groups + channel / per;
}

Tensor4 ChannelShuffle(const Tensor4& x, int64_t groups) {
  if (groups < 1 || x.c() % groups != 0) {
    throw ShapeError("channel_shuffle: groups " + Str(groups) +
                     " must divide channels " + Str(x.c()));
  }
  Tensor4 y(x.shape());
  const int64_t plane = x.shape().plane();
  for (int64_t n = 0; n < x.n(); ++n) {
    for (int64_t c = 0; c < x.c(); ++c) {
      std::copy_n(x.plane(n, c), plane,
                  y.plane(n, ShuffledChannel(c, x.c(), groups)));
    }
  }
  return y;
}

Tensor4 ChannelShuffleVjp(const Tensor4& cotangent, int64_t groups) {
  if (groups < 1 || cotangent.c() % groups != 0) {
    throw ShapeError("channel_shuffle vjp: groups must divide channels");
  }
  return ChannelShuffle(cotangent, cotangent.c() / groups);
}

Tensor4 AffineChannel(const Tensor4& x, std::span<const double> scale,
                      std::span<const double> bias) {
  if (static_cast<int64_t>(scale.size()) != x.c() ||
      static_cast<int64_t>(bias.size()) != x.c()) {
    throw ShapeError("affine_channel: scale/bias length must equal channels " +
                     Str(x.c()));
  }
  Tensor4 y(x.shape());
  const int64_t plane = x.shape().plane();
  for (int64_t n = 0; n < x.n(); ++n) {
    for (int64_t c = 0; c < x.c(); ++c) {
      const double* in = x.plane(n, c);
      double* out = y.plane(n, c);
      for (int64_t i = 0; i < plane; ++i) out[i] = scale[c] * in[i] + bias[c];
    }
  }
  return y;
}

AffineGrads AffineChannelVjp(const Tensor4& x, std::span<const double> scale,
                             const Tensor4& cotangent) {
  RequireSameShape(x, cotangent, "affine_channel vjp");
  if (static_cast<int64_t>(scale.size()) != x.c()) {
    throw ShapeError("affine_channel vjp: scale length");
  }
  AffineGrads g{Tensor4(x.shape()), std::vector<double>(x.c(), 0.0),
                std::vector<double>(x.c(), 0.0)};
  const int64_t plane = x.shape().plane();
  for (int64_t n = 0; n < x.n(); ++n) {
    for (int64_t c = 0; c < x.c(); ++c) {
      const double* in = x.plane(n, c);
      const double* u = cotangent.plane(n, c);
      double* dx = g.input.plane(n, c);
      for (int64_t i = 0; i < plane; ++i) {
        dx[i] = scale[c] * u[i];
        g.scale[c] += u[i] * in[i];
        g.bias[c] += u[i];
      }
    }
  }
  return g;
}

double ApplyActivation(Activation a, double v) {
  switch (a) {
    case Activation::kIdentity: return v;
    case Activation::kRelu: return v > 0.0 ? v : 0.0;
    case Activation::kRelu6: return std::min(std::max(v, 0.0), 6.0);
    case Activation::kHardSwish:
      return v * std::min(std::max(v + 3.0, 0.0), 6.0) / 6.0;
    case Activation::kHardSigmoid:
      return std::min(std::max(v + 3.0, 0.0), 6.0) / 6.0;
  }
  return v;
}

double ActivationDerivative(Activation a, double v) {
  switch (a) {
    case Activation::kIdentity: return 1.0;
    case Activation::kRelu: return v > 0.0 ? 1.0 : 0.0;
    case Activation::kRelu6: return (v > 0.0 && v < 6.0) ? 1.0 : 0.0;
    case Activation::kHardSwish:
      if (v <= -3.0) return 0.0;
      if (v >= 3.0) return 1.0;
      return (2.0 * v + 3.0) / 6.0;
    case Activation::kHardSigmoid:
      return (v > -3.0 && v < 3.0) ? 1.0 / 6.0 : 0.0;
  }
  return 1.0;
}

int ActivationPiece(Activation a, double v) {
  switch (a) {
    case Activation::kIdentity: return 0;
    case Activation::kRelu: return v > 0.0;
    case Activation::kRelu6: return (v > 0.0) + (v >= 6.0);
    case Activation::kHardSwish:
    case Activation::kHardSigmoid: return (v > -3.0) + (v >= 3.0);
  }
  return 0;
}

Tensor4 ActivationOp(const Tensor4& x, Activation kind) {
  Tensor4 y(x.shape());
  auto in = x.data();
  auto out = y.mutable_data();
  for (size_t i = 0; i < in.size(); ++i) out[i] = ApplyActivation(kind, in[i]);
  return y;
}

Tensor4 ActivationVjp(const Tensor4& x, Activation kind,
                      const Tensor4& cotangent) {
  RequireSameShape(x, cotangent, "activation vjp");
  Tensor4 dx(x.shape());
  auto in = x.data();
  auto u = cotangent.data();
  auto out = dx.mutable_data();
  for (size_t i = 0; i < in.size(); ++i) {
    out[i] = u[i] * ActivationDerivative(kind, in[i]);
  }
  return dx;
}

Tensor4 Add(const Tensor4& a, const Tensor4& b) {
  RequireSameShape(a, b, "add");
  Tensor4 y(a.shape());
  auto da = a.data();
  auto db = b.data();
  auto out = y.mutable_data();
  for (size_t i = 0; i < da.size(); ++i) out[i] = da[i] + db[i];
  return y;
}

Tensor4 GlobalAvgPool(const Tensor4& x) {
  Tensor4 y(Shape4{x.n(), x.c(), 1, 1});
  const int64_t plane = x.shape().plane();
  for (int64_t n = 0; n < x.n(); ++n) {
    for (int64_t c = 0; c < x.c(); ++c) {
      const double* in = x.plane(n, c);
      double acc = 0.0;
      for (int64_t i = 0; i < plane; ++i) acc += in[i];
      y.at(n, c, 0, 0) = acc / static_cast<double>(plane);
    }
  }
  return y;
}

Tensor4 Flatten(const Tensor4& x) {
  const auto d = x.data();
  return Tensor4(Shape4{x.n(), x.c() * x.h() * x.w(), 1, 1},
                 std::vector<double>(d.begin(), d.end()));
}

Tensor4 FlattenVjp(const Shape4& input_shape, const Tensor4& cotangent) {
  if (cotangent.size() != input_shape.count()) {
    throw ShapeError("flatten vjp: cotangent shape");
  }
  const auto d = cotangent.data();
  return Tensor4(input_shape, std::vector<double>(d.begin(), d.end()));
}

Tensor4 GlobalAvgPoolVjp(const Shape4& input_shape, const Tensor4& cotangent) {
  if (!(cotangent.shape() == Shape4{input_shape.n, input_shape.c, 1, 1})) {
    throw ShapeError("global_avg_pool vjp: cotangent shape");
  }
  Tensor4 dx(input_shape);
  const int64_t plane = input_shape.plane();
  for (int64_t n = 0; n < input_shape.n; ++n) {
    for (int64_t c = 0; c < input_shape.c; ++c) {
      const double v = cotangent.at(n, c, 0, 0) / static_cast<double>(plane);
      std::fill_n(dx.plane(n, c), plane, v);
    }
  }
  return dx;
}

Tensor4 Dense(const Tensor4& x, const Tensor4& weights,
              std::span<const double> bias, ExecContext* ctx) {
  const int64_t in = weights.c(), out = weights.n();
  if (x.h() != 1 || x.w() != 1 || x.c() != in || weights.h() != 1 ||
      weights.w() != 1) {
    throw ShapeError("dense: input " + x.shape().ToString() +
                     " incompatible with weights " +
                     weights.shape().ToString());
  }
  if (static_cast<int64_t>(bias.size()) != out) {
    throw ShapeError("dense: bias length must equal out features " + Str(out));
  }
  Tensor4 y(Shape4{x.n(), out, 1, 1});
  for (int64_t n = 0; n < x.n(); ++n) {
    const double* xi = x.plane(n, 0);
    for (int64_t o = 0; o < out; ++o) {
      const double* wo = weights.plane(o, 0);
      double acc = 0.0;
      for (int64_t i = 0; i < in; ++i) acc += wo[i] * xi[i];
      y.at(n, o, 0, 0) = acc + bias[o];
    }
  }
  if (ctx) ctx->AddMacs(static_cast<uint64_t>(x.n()) * in * out);
  return y;
}

DenseGrads DenseVjp(const Tensor4& x, const Tensor4& weights,
                    const Tensor4& cotangent) {
  const int64_t in = weights.c(), out = weights.n();
  if (!(cotangent.shape() == Shape4{x.n(), out, 1, 1}) || x.c() != in) {
    throw ShapeError("dense vjp: shape mismatch");
  }
  DenseGrads g{Tensor4(x.shape()), Tensor4(weights.shape()),
               std::vector<double>(out, 0.0)};
  for (int64_t n = 0; n < x.n(); ++n) {
    const double* xi = x.plane(n, 0);
    double* dx = g.input.plane(n, 0);
    for (int64_t o = 0; o < out; ++o) {
      const double u = cotangent.at(n, o, 0, 0);
      const double* wo = weights.plane(o, 0);
      double* dw = g.weights.plane(o, 0);
      for (int64_t i = 0; i < in; ++i) {
        dx[i] += wo[i] * u;
        dw[i] += u * xi[i];
      }
      g.bias[o] += u;
    }
  }
  return g;
}

Tensor4 ScaleChannels(const Tensor4& x, const Tensor4& gate) {
  if (!(gate.shape() == Shape4{x.n(), x.c(), 1, 1})) {
    throw ShapeError("scale_channels: gate " + gate.shape().ToString() +
                     " does not match " + x.shape().ToString());
  }
  Tensor4 y(x.shape());
  const int64_t plane = x.shape().plane();
  for (int64_t n = 0; n < x.n(); ++n) {
    for (int64_t c = 0; c < x.c(); ++c) {
      const double g = gate.at(n, c, 0, 0);
      const double* in = x.plane(n, c);
      double* out = y.plane(n, c);
      for (int64_t i = 0; i < plane; ++i) out[i] = in[i] * g;
    }
  }
  return y;
}

std::pair<Tensor4, Tensor4> ScaleChannelsVjp(const Tensor4& x,
                                             const Tensor4& gate,
                                             const Tensor4& cotangent) {
  RequireSameShape(x, cotangent, "scale_channels vjp");
  Tensor4 dx(x.shape());
  Tensor4 dgate(gate.shape());
  const int64_t plane = x.shape().plane();
  for (int64_t n = 0; n < x.n(); ++n) {
    for (int64_t c = 0; c < x.c(); ++c) {
      const double g = gate.at(n, c, 0, 0);
      const double* in = x.plane(n, c);
      const double* u = cotangent.plane(n, c);
      double* d = dx.plane(n, c);
      double acc = 0.0;
      for (int64_t i = 0; i < plane; ++i) {
        d[i] = u[i] * g;
        acc += u[i] * in[i];
      }
      dgate.at(n, c, 0, 0) = acc;
    }
  }
  return {std::move(dx), std::move(dgate)};
}

}  // namespace idlenet
