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

#include "idlenet/init.h"

#include <cmath>
#include <numbers>

namespace idlenet {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double CounterRng::Uniform(uint64_t i) const {
  return static_cast<double>(Bits(i) >> 11) * 0x1.0p-53;
}

double CounterRng::Normal(uint64_t i) const {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - Uniform(2 * i);
  const double u2 = Uniform(2 * i + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Tensor4 GlorotUniform(const Shape4& shape, int64_t fan_in, int64_t fan_out,
                      uint64_t seed, std::string_view name) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return RandomTensor(shape, seed, name, -bound, bound);
}

Tensor4 RandomTensor(const Shape4& shape, uint64_t seed, std::string_view name,
                     double lo, double hi) {
  Tensor4 t(shape);
  const CounterRng rng(seed, name);
  auto d = t.mutable_data();
  for (size_t i = 0; i < d.size(); ++i) d[i] = rng.Uniform(i, lo, hi);
  return t;
}

}  // namespace idlenet
