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

#include "idlenet/toy_train.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "idlenet/init.h"

namespace idlenet {

Tensor4 ToyDataset::Batch(int64_t begin, int64_t end) const {
  const int64_t plane = kToySide * kToySide;
  const auto src = images.data();
  std::vector<double> rows(src.begin() + begin * plane, src.begin() + end * plane);
  return Tensor4(Shape4{end - begin, 1, kToySide, kToySide}, std::move(rows));
}

ToyDataset MakeToyDataset(int64_t n, uint64_t seed) {
  if (n < 2) throw std::invalid_argument("toy dataset needs n >= 2");
  ToyDataset d;
  d.seed = seed;
  d.images = Tensor4(Shape4{n, 1, kToySide, kToySide});
  d.labels.resize(n);
  const CounterRng place(seed, "toy/place");
  const CounterRng noise(seed, "toy/noise");
  const int64_t half = kToySide / 2;
  for (int64_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    d.labels[i] = label;
    const int64_t top = static_cast<int64_t>(place.Bits(2 * i) %
                                             (kToySide - kToyBlob + 1));
    const int64_t left = label * half + static_cast<int64_t>(
        place.Bits(2 * i + 1) % (half - kToyBlob + 1));
    double* img = d.images.plane(i, 0);
    for (int64_t y = 0; y < kToySide; ++y) {
      for (int64_t x = 0; x < kToySide; ++x) {
        const bool in_blob =
            y >= top && y < top + kToyBlob && x >= left && x < left + kToyBlob;
        const uint64_t k = static_cast<uint64_t>((i * kToySide + y) * kToySide + x);
        img[y * kToySide + x] = (in_blob ? 1.0 : 0.0) + kToyNoise * noise.Normal(k);
      }
    }
  }
  return d;
}

std::string TrainResult::CurveCsv() const {
  std::ostringstream os;
  os.precision(17);
  os << "step,loss,accuracy\n";
  for (const TrainPoint& p : curve) {
    os << p.step << ',' << p.loss << ',' << p.accuracy << '\n';
  }
  return os.str();
}

double SoftmaxCrossEntropy(const Tensor4& logits, const std::vector<int>& labels,
                           Tensor4* grad) {
  const int64_t n = logits.n(), k = logits.c();
  if (static_cast<int64_t>(labels.size()) != n || logits.h() != 1 ||
      logits.w() != 1) {
    throw ShapeError("cross-entropy: logits " + logits.shape().ToString() +
                     " vs " + std::to_string(labels.size()) + " labels");
  }
  if (grad) *grad = Tensor4(logits.shape());
  const auto z = logits.data();
  double total = 0.0;
  std::vector<double> p(k);
  for (int64_t i = 0; i < n; ++i) {
    const double* row = z.data() + i * k;
    const double m = *std::max_element(row, row + k);
    double sum = 0.0;
    for (int64_t j = 0; j < k; ++j) sum += (p[j] = std::exp(row[j] - m));
    total += std::log(sum) - (row[labels[i]] - m);
    if (grad) {
      double* g = grad->mutable_data().data() + i * k;
      for (int64_t j = 0; j < k; ++j) {
        g[j] = (p[j] / sum - (j == labels[i] ? 1.0 : 0.0)) / n;
      }
    }
  }
  return total / n;
}

double Accuracy(const Tensor4& logits, const std::vector<int>& labels) {
  const int64_t n = logits.n(), k = logits.c();
  const auto z = logits.data();
  int64_t correct = 0;
  for (int64_t i = 0; i < n; ++i) {
    const double* row = z.data() + i * k;
    correct += (std::max_element(row, row + k) - row) == labels[i];
  }
  return n ? static_cast<double>(correct) / n : 0.0;
}

NetworkSpec ToyHCSpec(uint64_t seed) {
  NetworkSpec s;
  s.name = "toy-hc4";
  s.in_channels = 1;
  s.in_height = s.in_width = kToySide;
  s.stem = StemSpec{8, 3, 2, Activation::kHardSwish};
  for (BlockKind k : {BlockKind::kMBBlock, BlockKind::kIdleL,
                      BlockKind::kIdleR, BlockKind::kMBBlock}) {
    BlockConfig b = MakeIdleConfig(k, 8, 2, 3, 0.5);
    b.activation = Activation::kHardSwish;
    s.blocks.push_back(b);
  }
  s.head = HeadSpec{{16}, Activation::kHardSwish, HeadPool::kFlatten};
  s.classes = 2;
  s.seed = seed;
  return s;
}

TrainResult TrainSmoke(const NetworkSpec& spec, const ToyDataset& data,
                       const TrainOptions& opts) {
  if (!spec.classes || *spec.classes != 2) {
    throw ConfigError("train-smoke: spec must have a 2-class classifier");
  }
  if (spec.in_channels != 1 || spec.in_height != kToySide ||
      spec.in_width != kToySide) {
    throw ConfigError("train-smoke: spec input must be 1x16x16");
  }
  Network net = BuildNetwork(spec);
  std::vector<NamedTensor*> params = net.mutable_params();
  std::vector<Tensor4> velocity;
  for (const NamedTensor* p : params) velocity.emplace_back(p->value.shape());

  TrainResult result;
  const int64_t n = data.size();
  const int64_t bs = std::min(opts.batch_size, n);
  int64_t cursor = 0;
  for (int64_t step = 0; step < opts.steps; ++step) {
    if (cursor + bs > n) cursor = 0;
    const Tensor4 x = data.Batch(cursor, cursor + bs);
    const std::vector<int> y(data.labels.begin() + cursor,
                             data.labels.begin() + cursor + bs);
    cursor += bs;

    const Network::Trace trace = net.ForwardTraced(x);
    const Tensor4& logits = net.TraceOutput(trace);
    Tensor4 dlogits(logits.shape());
    const double loss = SoftmaxCrossEntropy(logits, y, &dlogits);
    result.curve.push_back({step, loss, Accuracy(logits, y)});
    if (!std::isfinite(loss)) {
      result.diverged = true;
      break;
    }
    const Network::Gradients grads = net.Backward(trace, dlogits);
    for (size_t i = 0; i < params.size(); ++i) {
      auto v = velocity[i].mutable_data();
      auto w = params[i]->value.mutable_data();
      const auto g = grads.params[i].data();
      for (size_t j = 0; j < v.size(); ++j) {
        v[j] = opts.momentum * v[j] + g[j];
        w[j] -= opts.lr * v[j];
      }
    }
  }

  const Tensor4 logits = net.Forward(data.images);
  result.final_loss = SoftmaxCrossEntropy(logits, data.labels, nullptr);
  result.final_accuracy = Accuracy(logits, data.labels);
  if (!std::isfinite(result.final_loss)) result.diverged = true;
  return result;
}

}  // namespace idlenet
