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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "idlenet/toy_train.h"
#include "reference.h"

namespace idlenet {
namespace {

TEST(ToyDatasetTest, DeterministicPerSeed) {
  const ToyDataset a = MakeToyDataset(64, 3), b = MakeToyDataset(64, 3);
  EXPECT_TRUE(a.images.BitwiseEquals(b.images));
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_FALSE(a.images.BitwiseEquals(MakeToyDataset(64, 4).images));
}

TEST(ToyDatasetTest, BalancedLabels) {
  const ToyDataset d = MakeToyDataset(128, 0);
  int ones = 0;
  for (int l : d.labels) ones += l;
  EXPECT_NEAR(ones / 128.0, 0.5, 0.1);
  EXPECT_EQ(d.images.shape(), (Shape4{128, 1, kToySide, kToySide}));
}

TEST(ToyDatasetTest, CentroidClassifierSeparatesIt) {
  for (uint64_t seed : {0u, 1u, 2u}) {
    const ToyDataset d = MakeToyDataset(128, seed);
    const std::vector<double> px(d.images.data().begin(),
                                 d.images.data().end());
    EXPECT_GE(reference::CentroidAccuracy(px, d.labels, kToySide * kToySide),
              0.95)
        << "seed " << seed;
  }
}

TEST(SoftmaxTest, UniformLogitsGiveLn2) {
  Tensor4 logits({4, 2, 1, 1});
  Tensor4 grad({4, 2, 1, 1});
  const double loss = SoftmaxCrossEntropy(logits, {0, 1, 1, 0}, &grad);
  EXPECT_NEAR(loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(grad.at(0, 0, 0, 0), -0.5 / 4, 1e-15);
  EXPECT_NEAR(grad.at(0, 1, 0, 0), 0.5 / 4, 1e-15);
  EXPECT_EQ(Accuracy(logits, {0, 0, 0, 0}), 1.0);  // ties pick class 0
}

TEST(TrainSmokeTest, HybridNetLearnsWithin200Steps) {
  for (uint64_t seed : {0u, 1u}) {
    const ToyDataset data = MakeToyDataset(128, seed);
    const TrainResult r = TrainSmoke(ToyHCSpec(seed), data, {});
    EXPECT_FALSE(r.diverged);
    EXPECT_GE(r.final_accuracy, 0.95) << "seed " << seed;
    EXPECT_LE(r.curve.size(), 200u);
  }
}

TEST(TrainSmokeTest, DeterministicPerSeed) {
  const ToyDataset data = MakeToyDataset(64, 5);
  const TrainOptions opts{.steps = 10};
  const TrainResult a = TrainSmoke(ToyHCSpec(5), data, opts);
  const TrainResult b = TrainSmoke(ToyHCSpec(5), data, opts);
  EXPECT_EQ(a.CurveCsv(), b.CurveCsv());
  EXPECT_EQ(a.final_loss, b.final_loss);
}

// A single init can land far from chance on this spatial task, so the claim
// is checked on the mean over init seeds.
TEST(TrainSmokeTest, UntrainedIsNearChanceOnAverage) {
  const ToyDataset data = MakeToyDataset(128, 0);
  double sum = 0.0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    sum += TrainSmoke(ToyHCSpec(seed), data, {.steps = 0}).final_accuracy;
  }
  EXPECT_NEAR(sum / 20.0, 0.5, 0.15);
}

TEST(TrainSmokeTest, RejectsNonBinarySpec) {
  NetworkSpec spec = ToyHCSpec();
  spec.classes = 3;
  EXPECT_THROW(TrainSmoke(spec, MakeToyDataset(8, 0), {}), std::invalid_argument);
}

}  // namespace
}  // namespace idlenet
