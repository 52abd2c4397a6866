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

// Synthetic two-class dataset and a minimal SGD-with-momentum trainer.

#ifndef IDLENET_TOY_TRAIN_H_
#define IDLENET_TOY_TRAIN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "idlenet/network.h"

namespace idlenet {

inline constexpr int64_t kToySide = 16;
inline constexpr int64_t kToyBlob = 5;
inline constexpr double kToyNoise = 0.1;

// 16x16 single-channel images. Class 0 has a 5x5 blob of intensity 1 fully
// inside the left half, class 1 inside the right half; every pixel gets
// N(0, 0.1^2) noise. Labels alternate 0, 1, 0, ... so classes are balanced.
struct ToyDataset {
  Tensor4 images{Shape4{1, 1, kToySide, kToySide}};
  std::vector<int> labels;
  uint64_t seed = 0;

  int64_t size() const { return static_cast<int64_t>(labels.size()); }
  // Rows [begin, end) as a batch.
  Tensor4 Batch(int64_t begin, int64_t end) const;
};

ToyDataset MakeToyDataset(int64_t n, uint64_t seed);

struct TrainOptions {
  int64_t steps = 200;
  double lr = 0.05;
  double momentum = 0.9;
  // Mini-batches are taken in dataset order, wrapping around.
  int64_t batch_size = 32;
};

struct TrainPoint {
  int64_t step = 0;
  double loss = 0.0;      // mean cross-entropy of the step's batch
  double accuracy = 0.0;  // on the step's batch, before the update
};

struct TrainResult {
  std::vector<TrainPoint> curve;
  double final_accuracy = 0.0;  // whole training set, after the last step
  double final_loss = 0.0;
  bool diverged = false;        // a non-finite loss stopped training

  // Header step,loss,accuracy.
  std::string CurveCsv() const;
};

// Softmax cross-entropy on logits (n, classes, 1, 1). Returns the mean loss
// and writes d(mean loss)/d(logits) into grad when non-null.
double SoftmaxCrossEntropy(const Tensor4& logits, const std::vector<int>& labels,
                           Tensor4* grad);
// Fraction of rows whose arg-max logit equals the label.
double Accuracy(const Tensor4& logits, const std::vector<int>& labels);

// The 4-block hybrid toy network (MBBlock, IdleL, IdleR, MBBlock; C=8, r=2,
// k=3, alpha=0.5) shipped as configs/toy-hc4.json.
NetworkSpec ToyHCSpec(uint64_t seed = 0);

// Builds spec (which must classify into 2 classes over 1x16x16 inputs) and
// trains it on data. Deterministic given the spec seed and the dataset.
TrainResult TrainSmoke(const NetworkSpec& spec, const ToyDataset& data,
                       const TrainOptions& opts);

}  // namespace idlenet

#endif  // IDLENET_TOY_TRAIN_H_
