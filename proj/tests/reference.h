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
// Test-only references, written without reusing library code paths: a
// direct-summation convolution with explicit bounds checks, per-layer MAC
// tallies, and a nearest-centroid classifier for the toy dataset.

#ifndef IDLENET_TESTS_REFERENCE_H_
#define IDLENET_TESTS_REFERENCE_H_

#include <cmath>
#include <cstdint>
#include <vector>

namespace idlenet::reference {

// Flat NCHW buffers. Zero padding of (k - 1) / 2, output ceil(h / s).
// Sums over (ci, ky, kx) in that order so results are comparable bitwise.
inline std::vector<double> DirectConv(const std::vector<double>& x, int64_t n,
                                      int64_t cin, int64_t h, int64_t w,
                                      const std::vector<double>& wt,
                                      int64_t cout, int64_t k, int64_t s,
                                      int64_t groups, int64_t* oh_out,
                                      int64_t* ow_out) {
  const int64_t pad = (k - 1) / 2;
  const int64_t oh = (h + s - 1) / s, ow = (w + s - 1) / s;
  const int64_t cin_g = cin / groups, cout_g = cout / groups;
  std::vector<double> y(n * cout * oh * ow, 0.0);
  for (int64_t b = 0; b < n; ++b)
    for (int64_t co = 0; co < cout; ++co) {
      const int64_t g = co / cout_g;
      for (int64_t oy = 0; oy < oh; ++oy)
        for (int64_t ox = 0; ox < ow; ++ox) {
          double acc = 0.0;
          for (int64_t ci = 0; ci < cin_g; ++ci)
            for (int64_t ky = 0; ky < k; ++ky)
              for (int64_t kx = 0; kx < k; ++kx) {
                const int64_t iy = oy * s + ky - pad, ix = ox * s + kx - pad;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                acc += x[((b * cin + g * cin_g + ci) * h + iy) * w + ix] *
                       wt[((co * cin_g + ci) * k + ky) * k + kx];
              }
          y[((b * cout + co) * oh + oy) * ow + ox] = acc;
        }
    }
  *oh_out = oh;
  *ow_out = ow;
  return y;
}

inline int64_t Ceil(int64_t a, int64_t b) { return (a + b - 1) / b; }

// expand 1x1 -> depthwise kxk (stride s) -> project 1x1, SE off.
inline uint64_t MBBlockMacs(int64_t cin, int64_t cout, int64_t e, int64_t k,
                            int64_t s, int64_t h, int64_t w) {
  const uint64_t in_px = h * w, out_px = Ceil(h, s) * Ceil(w, s);
  return cin * e * in_px + e * k * k * out_px + e * cout * out_px;
}

// Active branch narrows both pointwise layers to `active` channels.
inline uint64_t IdleBlockMacs(int64_t active, int64_t e, int64_t k, int64_t h,
                              int64_t w) {
  const uint64_t px = h * w;
  return active * e * px + e * k * k * px + e * active * px;
}

// Nearest class mean in pixel space; returns training accuracy.
inline double CentroidAccuracy(const std::vector<double>& images,
                               const std::vector<int>& labels, int64_t dim) {
  std::vector<double> mean[2] = {std::vector<double>(dim, 0.0),
                                 std::vector<double>(dim, 0.0)};
  int64_t count[2] = {0, 0};
  const int64_t n = static_cast<int64_t>(labels.size());
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t d = 0; d < dim; ++d) mean[labels[i]][d] += images[i * dim + d];
    ++count[labels[i]];
  }
  for (int c = 0; c < 2; ++c)
    for (double& v : mean[c]) v /= static_cast<double>(count[c]);
  int64_t right = 0;
  for (int64_t i = 0; i < n; ++i) {
    double dist[2] = {0.0, 0.0};
    for (int c = 0; c < 2; ++c)
      for (int64_t d = 0; d < dim; ++d) {
        const double t = images[i * dim + d] - mean[c][d];
        dist[c] += t * t;
      }
    right += (dist[1] < dist[0] ? 1 : 0) == labels[i];
  }
  return static_cast<double>(right) / static_cast<double>(n);
}

}  // namespace idlenet::reference

#endif  // IDLENET_TESTS_REFERENCE_H_
