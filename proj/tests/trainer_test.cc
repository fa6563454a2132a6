/* Copyright 2026 The vqk Authors. All Rights Reserved.

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
#include "vqk/trainer.h"

#include <cmath>
#include <limits>
#include <set>

#include <gtest/gtest.h>

#include "vqk/synthetic.h"

namespace vqk {
namespace {

TEST(AdamStepTest, FirstStepClosedForm) {
  Tensor x = Tensor::Scalar(2.0);
  Tensor* params[] = {&x};
  const Tensor grads[] = {Tensor::Scalar(1.0)};
  OptimizerState state;
  AdamStep(params, grads, state, {.learning_rate = 0.1, .weight_decay = 0.0});
  EXPECT_NEAR(x.item(), 1.9, 1e-8);
  EXPECT_EQ(state.step, 1);
}

TEST(AdamStepTest, ZeroGradientIsFixedPoint) {
  Tensor x = Tensor::Vector({1.5, -2.0});
  Tensor* params[] = {&x};
  const Tensor grads[] = {Tensor({2})};
  OptimizerState state;
  for (int i = 0; i < 3; ++i) AdamStep(params, grads, state, {.learning_rate = 0.1});
  EXPECT_EQ(x, Tensor::Vector({1.5, -2.0}));
}

// Textbook Adam, written out independently of the library loop.
std::vector<double> ReferenceAdam(double x, double lr, double wd, int steps) {
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double m = 0, v = 0;
  std::vector<double> path;
  for (int t = 1; t <= steps; ++t) {
    const double g = 2 * x + wd * x;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    x = x - lr * mhat / (std::sqrt(vhat) + eps);
    path.push_back(x);
  }
  return path;
}

TEST(AdamStepTest, FiveStepsOnSquareMatchReference) {
  for (double wd : {0.0, 0.01}) {
    Tensor x = Tensor::Scalar(1.0);
    Tensor* params[] = {&x};
    OptimizerState state;
    const std::vector<double> want = ReferenceAdam(1.0, 0.1, wd, 5);
    for (int t = 0; t < 5; ++t) {
      const Tensor grads[] = {Tensor::Scalar(2 * x.item())};
      AdamStep(params, grads, state, {.learning_rate = 0.1, .weight_decay = wd});
      EXPECT_NEAR(x.item(), want[t], 1e-15) << "step " << t + 1;
    }
  }
}

TEST(AdamStepTest, DecoupledDecayShrinksParameterDirectly) {
  Tensor x = Tensor::Scalar(2.0);
  Tensor* params[] = {&x};
  const Tensor grads[] = {Tensor::Scalar(0.0)};
  OptimizerState state;
  AdamStep(params, grads, state,
           {.learning_rate = 0.1, .weight_decay = 0.5, .decoupled = true});
  EXPECT_DOUBLE_EQ(x.item(), 2.0 - 0.1 * 0.5 * 2.0);
}

TEST(AdamStepTest, MismatchedShapesRejected) {
  Tensor x = Tensor::Vector({1, 2});
  Tensor* params[] = {&x};
  const Tensor grads[] = {Tensor({3})};
  OptimizerState state;
  EXPECT_THROW(AdamStep(params, grads, state, {}), DimensionError);
}

Tensor Ramp(std::size_t steps, std::size_t dim) {
  Tensor x({steps, dim});
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t d = 0; d < dim; ++d) x.at(t, d) = static_cast<double>(t);
  return x;
}

TEST(SampleSegmentsTest, EqualLengthIsIdentity) {
  std::mt19937_64 rng(1);
  const Tensor x = Ramp(9, 3);
  EXPECT_EQ(SampleSegments(x, 9, rng), x);
}

TEST(SampleSegmentsTest, ShortVideoRepeatsEveryIndex) {
  std::mt19937_64 rng(2);
  const Tensor out = SampleSegments(Ramp(2, 1), 4, rng);
  EXPECT_EQ(out, Tensor::Matrix(4, 1, {0, 0, 1, 1}));
}

TEST(SampleSegmentsTest, OrderedAndOneIndexPerBin) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor out = SampleSegments(Ramp(37, 1), 10, rng);
    for (std::size_t i = 0; i < 10; ++i) {
      const std::size_t lo = i * 37 / 10, hi = std::max(lo + 1, (i + 1) * 37 / 10);
      EXPECT_GE(out[i], static_cast<double>(lo));
      EXPECT_LT(out[i], static_cast<double>(hi));
    }
  }
}

TEST(SampleSegmentsTest, HistogramIsUniformWithinBins) {
  std::mt19937_64 rng(4);
  std::vector<int> counts(20, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const Tensor out = SampleSegments(Ramp(20, 1), 10, rng);
    for (double v : out.data()) ++counts[static_cast<std::size_t>(v)];
  }
  for (int c : counts) EXPECT_NEAR(c, draws / 2.0, 0.05 * draws / 2.0);
}

std::vector<LabelVector> Labels(int classes, const std::vector<std::vector<int>>& sets) {
  std::vector<LabelVector> out;
  for (const auto& s : sets) out.emplace_back(classes, s);
  return out;
}

void ExpectValidEpoch(const std::vector<std::vector<std::size_t>>& batches,
                      const std::vector<LabelVector>& labels, int size, int pairs) {
  std::set<std::size_t> seen;
  for (const auto& b : batches) {
    EXPECT_EQ(b.size(), static_cast<std::size_t>(size));
    EXPECT_EQ(std::set<std::size_t>(b.begin(), b.end()).size(), b.size());
    EXPECT_GE(CountSharedPairs(b, labels), pairs);
    seen.insert(b.begin(), b.end());
  }
  EXPECT_EQ(seen.size(), labels.size());
}

TEST(MakeBatchesTest, SharedClassAlwaysSatisfies) {
  std::vector<std::vector<int>> sets(23, std::vector<int>{1});
  const auto labels = Labels(2, sets);
  std::mt19937_64 rng(5);
  const auto batches = MakeBatches(labels, 10, 3, rng);
  EXPECT_EQ(batches.size(), 3u);
  ExpectValidEpoch(batches, labels, 10, 3);
}

TEST(MakeBatchesTest, DisjointLabelsAreRejectedWithClassNames) {
  std::vector<std::vector<int>> sets;
  std::vector<std::string> names;
  for (int c = 0; c < 10; ++c) {
    sets.push_back({c});
    names.push_back("cls" + std::to_string(c));
  }
  const auto labels = Labels(10, sets);
  std::mt19937_64 rng(6);
  try {
    MakeBatches(labels, 10, 3, rng, names);
    FAIL() << "expected a configuration error";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("cls0 (1 video)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("cls9"), std::string::npos) << msg;
  }
}

TEST(MakeBatchesTest, TooFewVideos) {
  const auto labels = Labels(1, {{0}, {0}, {0}});
  std::mt19937_64 rng(7);
  EXPECT_THROW(MakeBatches(labels, 10, 3, rng), ConfigError);
}

TEST(MakeBatchesTest, SeededReplayAndConstraintOnSynthetic) {
  const SyntheticDataset data = GenerateSynthetic(SyntheticSpec{}, 0);
  std::vector<LabelVector> labels;
  for (const VideoRecord& v : data.train.videos) labels.push_back(v.label);
  std::mt19937_64 a(8), b(8);
  for (int epoch = 0; epoch < 5; ++epoch) {
    const auto first = MakeBatches(labels, 10, 3, a);
    EXPECT_EQ(first, MakeBatches(labels, 10, 3, b));
    ExpectValidEpoch(first, labels, 10, 3);
  }
}

TEST(MakeBatchesTest, SparseOverlapStillSatisfied) {
  // Nine videos of class 0 among thirty; every batch needs three of them.
  std::vector<std::vector<int>> sets;
  for (int i = 0; i < 30; ++i) sets.push_back({i < 9 ? 0 : i - 8});
  const auto labels = Labels(22, sets);
  std::mt19937_64 rng(9);
  for (int epoch = 0; epoch < 10; ++epoch) {
    ExpectValidEpoch(MakeBatches(labels, 10, 3, rng), labels, 10, 3);
  }
}

TEST(MakeBatchesTest, RepairHandlesExactSplit) {
  // Thirty class-0 videos among one hundred: every batch needs exactly three,
  // which a plain shuffle hits with probability about 2e-5.
  std::vector<std::vector<int>> sets;
  for (int i = 0; i < 100; ++i) sets.push_back({i < 30 ? 0 : i - 29});
  const auto labels = Labels(71, sets);
  std::mt19937_64 rng(10);
  for (int epoch = 0; epoch < 3; ++epoch) {
    ExpectValidEpoch(MakeBatches(labels, 10, 3, rng), labels, 10, 3);
  }
}

ModelConfig SmallModel() {
  ModelConfig c;
  c.num_classes = 3;
  c.feature_dim = 16;
  c.hidden_dim = 8;
  return c;
}

SyntheticSpec SmallSpec() {
  SyntheticSpec s;
  s.train_videos = 12;
  s.test_videos = 0;
  s.min_steps = 20;
  s.max_steps = 30;
  s.feature_dim = 16;
  s.min_instance_length = 3;
  s.max_instance_length = 6;
  return s;
}

TrainConfig SmallTrain() {
  TrainConfig t;
  t.batch_size = 6;
  t.min_shared_pairs = 1;
  t.t_train = 16;
  t.learning_rate = 1e-3;
  t.epochs = 2;
  t.loss.m = 4;
  return t;
}

TEST(TrainStepTest, SingleStepDescendsOnSameBatch) {
  const ModelConfig model = SmallModel();
  const SyntheticDataset data = GenerateSynthetic(SmallSpec(), 10);
  TrainConfig train = SmallTrain();
  train.learning_rate = 1e-4;
  std::vector<Tensor> features;
  std::vector<LabelVector> labels;
  for (int i = 0; i < 6; ++i) {
    features.push_back(data.train.videos[i].features);
    labels.push_back(data.train.videos[i].label);
  }
  ModelParams params = InitParams(model, 11);
  OptimizerState state;
  const LossBreakdown before = TrainStep(params, state, features, labels, model, train);
  Tape tape;
  const double after =
      BatchLoss(tape, BindParams(tape, params, false), features, labels, model, train)
          .breakdown.total;
  EXPECT_LT(after, before.total);
}

TEST(TrainStepTest, NonFiniteLossNamesTerm) {
  const ModelConfig model = SmallModel();
  const SyntheticDataset data = GenerateSynthetic(SmallSpec(), 12);
  ModelParams params = InitParams(model, 12);
  params.query_init[0] = std::numeric_limits<double>::quiet_NaN();
  OptimizerState state;
  std::vector<Tensor> features{data.train.videos[0].features, data.train.videos[1].features};
  std::vector<LabelVector> labels{data.train.videos[0].label, data.train.videos[1].label};
  try {
    TrainStep(params, state, features, labels, model, SmallTrain());
    FAIL() << "expected a non-finite loss error";
  } catch (const NonFiniteLossError& e) {
    EXPECT_NE(std::string(e.what()).find("video_cls"), std::string::npos) << e.what();
  }
}

TEST(TrainTest, ZeroEpochsReturnsInitialParams) {
  const ModelConfig model = SmallModel();
  const SyntheticDataset data = GenerateSynthetic(SmallSpec(), 13);
  TrainConfig train = SmallTrain();
  train.epochs = 0;
  train.seed = 99;
  const TrainResult r = Train(data.train, model, train);
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(r.optimizer.step, 0);
  const ModelParams init = InitParams(model, 99);
  EXPECT_EQ(r.params.query_init, init.query_init);
  EXPECT_EQ(r.params.fusion[0].weight, init.fusion[0].weight);
}

TEST(TrainTest, SeededRunsAreBitIdentical) {
  const ModelConfig model = SmallModel();
  const SyntheticDataset data = GenerateSynthetic(SmallSpec(), 14);
  const TrainResult a = Train(data.train, model, SmallTrain());
  const TrainResult b = Train(data.train, model, SmallTrain());
  ASSERT_EQ(a.log.size(), 2u);
  EXPECT_EQ(a.log[1].mean.total, b.log[1].mean.total);
  EXPECT_EQ(a.optimizer.step, 4);
  std::vector<Tensor> pa, pb;
  ModelParams ca = a.params, cb = b.params;
  ForEachParam([&](const std::string&, Tensor& t) { pa.push_back(t); }, ca);
  ForEachParam([&](const std::string&, Tensor& t) { pb.push_back(t); }, cb);
  EXPECT_EQ(pa, pb);
}

TEST(TrainTest, LossFallsAndCallbackRuns) {
  const ModelConfig model = SmallModel();
  const SyntheticDataset data = GenerateSynthetic(SmallSpec(), 15);
  TrainConfig train = SmallTrain();
  train.epochs = 15;
  int calls = 0;
  const TrainResult r = Train(data.train, model, train, [&](const ModelParams&, EpochLog& log) {
    ++calls;
    log.validation_map = 0.5;
  });
  EXPECT_EQ(calls, 15);
  EXPECT_EQ(r.log.back().validation_map, 0.5);
  EXPECT_EQ(r.log.back().batches, 2);
  EXPECT_LT(r.log.back().mean.total, r.log.front().mean.total);
}

TEST(TrainTest, FeatureWidthMismatchRejected) {
  ModelConfig model = SmallModel();
  model.feature_dim = 8;
  const SyntheticDataset data = GenerateSynthetic(SmallSpec(), 16);
  EXPECT_THROW(Train(data.train, model, SmallTrain()), DimensionError);
}

}  // namespace
}  // namespace vqk
