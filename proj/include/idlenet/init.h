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

#ifndef IDLENET_INIT_H_
#define IDLENET_INIT_H_

#include <cstdint>
#include <string_view>

#include "idlenet/tensor.h"

namespace idlenet {

uint64_t SplitMix64(uint64_t x);
uint64_t Fnv1a64(std::string_view s);

// Counter-based stream: element i of stream `key` is a pure function of
// (key, i), so draws never depend on how many values were taken before.
class CounterRng {
 public:
  explicit CounterRng(uint64_t key) : key_(key) {}
  CounterRng(uint64_t seed, std::string_view name)
      : key_(SplitMix64(seed ^ Fnv1a64(name))) {}

  uint64_t Bits(uint64_t i) const { return SplitMix64(key_ + SplitMix64(i)); }
  // Uniform in [0, 1) with 53 random bits.
  double Uniform(uint64_t i) const;
  double Uniform(uint64_t i, double lo, double hi) const {
    return lo + (hi - lo) * Uniform(i);
  }
  // Standard normal via Box-Muller on draws 2i and 2i+1.
  double Normal(uint64_t i) const;

 private:
  uint64_t key_;
};

// Uniform in [-b, b] with b = sqrt(6 / (fan_in + fan_out)), keyed by name.
Tensor4 GlorotUniform(const Shape4& shape, int64_t fan_in, int64_t fan_out,
                      uint64_t seed, std::string_view name);

// Uniform in [lo, hi), keyed by (seed, name). For test inputs.
Tensor4 RandomTensor(const Shape4& shape, uint64_t seed, std::string_view name,
                     double lo = -1.0, double hi = 1.0);

}  // namespace idlenet

#endif  // IDLENET_INIT_H_
