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

#include "idlenet/tensor.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace idlenet {
namespace {

void CheckShape(const Shape4& s) {
  if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1) {
    throw ShapeError("tensor dimensions must be >= 1, got " + s.ToString());
  }
}

}  // namespace

std::string Shape4::ToString() const {
  std::ostringstream os;
  os << "(" << n << "," << c << "," << h << "," << w << ")";
  return os.str();
}

Tensor4::Tensor4(Shape4 shape, double fill) : shape_(shape) {
  CheckShape(shape_);
  data_.assign(static_cast<size_t>(shape_.count()), fill);
}

Tensor4::Tensor4(Shape4 shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  CheckShape(shape_);
  if (static_cast<int64_t>(data_.size()) != shape_.count()) {
    throw ShapeError("data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_.ToString());
  }
}

bool Tensor4::BitwiseEquals(const Tensor4& other) const {
  return shape_ == other.shape_ &&
         std::memcmp(data_.data(), other.data_.data(),
                     data_.size() * sizeof(double)) == 0;
}

double MaxAbsDiff(const Tensor4& a, const Tensor4& b) {
  if (!(a.shape() == b.shape())) {
    throw ShapeError("MaxAbsDiff shape mismatch " + a.shape().ToString() +
                     " vs " + b.shape().ToString());
  }
  double m = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da[i] - db[i]));
  return m;
}

}  // namespace idlenet
