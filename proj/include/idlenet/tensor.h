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

#ifndef IDLENET_TENSOR_H_
#define IDLENET_TENSOR_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace idlenet {

// Raised for any shape/size contract violation in the op layer.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Shape4 {
  int64_t n = 1;
  int64_t c = 1;
  int64_t h = 1;
  int64_t w = 1;

  int64_t count() const { return n * c * h * w; }
  int64_t plane() const { return h * w; }
  bool operator==(const Shape4&) const = default;
  std::string ToString() const;
};

// Dense rank-4 tensor of doubles laid out n -> c -> h -> w (row-major).
// All dimensions are >= 1 and data().size() == shape().count().
class Tensor4 {
 public:
  explicit Tensor4(Shape4 shape, double fill = 0.0);
  Tensor4(Shape4 shape, std::vector<double> data);

  static Tensor4 Zeros(Shape4 shape) { return Tensor4(shape, 0.0); }
  static Tensor4 Filled(Shape4 shape, double v) { return Tensor4(shape, v); }

  const Shape4& shape() const { return shape_; }
  int64_t n() const { return shape_.n; }
  int64_t c() const { return shape_.c; }
  int64_t h() const { return shape_.h; }
  int64_t w() const { return shape_.w; }
  int64_t size() const { return shape_.count(); }

  std::span<const double> data() const { return data_; }
  std::span<double> mutable_data() { return data_; }

  int64_t index(int64_t n, int64_t c, int64_t y, int64_t x) const {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  double at(int64_t n, int64_t c, int64_t y, int64_t x) const {
    return data_[index(n, c, y, x)];
  }
  double& at(int64_t n, int64_t c, int64_t y, int64_t x) {
    return data_[index(n, c, y, x)];
  }

  // Pointer to the (n, c) spatial plane.
  const double* plane(int64_t n, int64_t c) const {
    return data_.data() + (n * shape_.c + c) * shape_.plane();
  }
  double* plane(int64_t n, int64_t c) {
    return data_.data() + (n * shape_.c + c) * shape_.plane();
  }

  // Bitwise equality of shape and every element.
  bool BitwiseEquals(const Tensor4& other) const;

 private:
  Shape4 shape_;
  std::vector<double> data_;
};

double MaxAbsDiff(const Tensor4& a, const Tensor4& b);

}  // namespace idlenet

#endif  // IDLENET_TENSOR_H_
