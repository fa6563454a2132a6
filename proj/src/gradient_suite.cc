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
#include "vqk/gradient_suite.h"

#include <algorithm>
#include <functional>
#include <random>

#include "vqk/gradcheck.h"
#include "vqk/losses.h"
#include "vqk/model.h"
#include "vqk/ops.h"

namespace vqk {
namespace {

Tensor Gaussian(const Shape& shape, std::mt19937_64& rng) {
  Tensor t(shape);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& x : t.data()) x = n(rng);
  return t;
}

// Contract a tensor-valued op to a scalar with fixed random weights.
Var Project(Var v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return Dot(v, v.tape().Constant(Gaussian(v.shape(), rng)));
}

struct Case {
  std::string name;
  std::vector<Shape> shapes;
  std::function<Var(std::span<const Var>, std::uint64_t)> fn;
};

Case OpCase(std::string name, std::vector<Shape> shapes,
            std::function<Var(std::span<const Var>)> op) {
  return {std::move(name), std::move(shapes),
          [op](std::span<const Var> p, std::uint64_t seed) {
            return Project(op(p), seed);
          }};
}

Case LossCase(std::string name, std::vector<Shape> shapes,
              std::function<Var(std::span<const Var>)> loss) {
  return {std::move(name), std::move(shapes),
          [loss](std::span<const Var> p, std::uint64_t) { return loss(p); }};
}

ModelConfig TinyModel() {
  ModelConfig c;
  c.num_classes = 2;
  c.feature_dim = 8;
  c.hidden_dim = 4;
  return c;
}

// Full joint loss over two videos; every model parameter is a check point.
Case JointCase(std::string name, QueryMode mode) {
  const ModelConfig config = TinyModel();
  ModelParams init = InitParams(config, 0);
  std::vector<Shape> shapes;
  ForEachParam([&](const std::string&, Tensor& t) { shapes.push_back(t.shape()); },
               init);
  return {std::move(name), std::move(shapes),
          [config, mode](std::span<const Var> p, std::uint64_t seed) {
            Tape& tape = p[0].tape();
            ModelVars vars;
            std::size_t i = 0;
            ForEachParam([&](const std::string&, Var& v) { v = Scale(p[i++], 0.3); },
                         vars);
            std::mt19937_64 rng(seed);
            std::vector<LabelVector> labels{LabelVector(2, {0}),
                                            LabelVector(2, {0, 1})};
            std::vector<ModelOutputs> outs{
                Forward(tape.Constant(Gaussian({6, 8}, rng)), vars, config, mode),
                Forward(tape.Constant(Gaussian({5, 8}, rng)), vars, config, mode)};
            LossWeights w;
            w.m = 3;
            return ComputeJointLoss(outs, labels, w, mode == QueryMode::kVideoSpecific)
                .total;
          }};
}

std::vector<Case> BuildCases() {
  std::vector<Case> cases = {
      OpCase("matmul", {{3, 4}, {4, 2}}, [](auto p) { return MatMul(p[0], p[1]); }),
      OpCase("transpose", {{3, 4}}, [](auto p) { return Transpose(p[0]); }),
      OpCase("add_mul", {{3, 2}, {3, 2}},
             [](auto p) { return Mul(Add(p[0], p[1]), p[1]); }),
      OpCase("div_by_scalar", {{4}, {}},
             [](auto p) { return DivByScalar(p[0], AddScalar(Square(p[1]), 1.0)); }),
      OpCase("row_bias", {{3, 4}, {4}}, [](auto p) { return AddRowBias(p[0], p[1]); }),
      OpCase("scale_columns", {{3, 4}, {4}},
             [](auto p) { return ScaleColumns(p[0], p[1]); }),
      OpCase("softmax", {{3, 5}}, [](auto p) { return SoftmaxRows(p[0]); }),
      OpCase("log_softmax", {{3, 5}}, [](auto p) { return LogSoftmaxRows(p[0]); }),
      OpCase("layer_norm", {{3, 6}, {6}, {6}},
             [](auto p) { return LayerNorm(p[0], p[1], p[2], 1e-5); }),
      OpCase("conv1d", {{6, 3}, {2, 3, 3}, {2}},
             [](auto p) { return Conv1dTemporal(p[0], p[1], p[2]); }),
      OpCase("sigmoid", {{7}}, [](auto p) { return Sigmoid(p[0]); }),
      OpCase("leaky_relu", {{7}}, [](auto p) { return LeakyRelu(p[0], 0.2); }),
      OpCase("abs", {{7}}, [](auto p) { return Abs(p[0]); }),
      OpCase("sqrt_log", {{7}},
             [](auto p) { return Log(Sqrt(AddScalar(Square(p[0]), 0.5))); }),
      OpCase("topk_mean", {{4, 8}}, [](auto p) { return TopkMeanRows(p[0], 3); }),
      OpCase("cosine_distance", {{6}, {6}},
             [](auto p) { return CosineDistance(p[0], p[1]); }),
      OpCase("slicing", {{4, 6}},
             [](auto p) {
               Var rows = Add(Row(p[0], 1), Column(Transpose(p[0]), 2));
               Var sliced = Reshape(SliceColumns(p[0], 2, 5), {2, 6});
               return Add(rows, Row(sliced, 1));
             }),
      OpCase("attention_block", {{3, 6}, {5, 6}, {6, 6}, {6, 6}, {6, 6}, {6, 6}, {6}, {6}},
             [](auto p) {
               AttentionBlockT<Var> b{p[2], p[3], p[4], p[5], p[6], p[7]};
               return AttentionBlock(p[0], p[1], p[1], b, 1e-5);
             }),

      LossCase("video_cls", {{4, 8}, {4, 8}},
               [](auto p) { return VideoClsLoss(p[0], p[1], LabelVector(3, {0, 2}), 3); }),
      LossCase("mutual_learning", {{8}, {8}},
               [](auto p) { return MutualLearningLoss(Sigmoid(p[0]), Sigmoid(p[1])); }),
      LossCase("sparsity", {{8}, {8}},
               [](auto p) {
                 Var r = Sigmoid(p[0]), f = Sigmoid(p[1]);
                 return SparsityLoss(r, f, Scale(Add(r, f), 0.5));
               }),
      LossCase("guide", {{4, 8}, {8}, {8}},
               [](auto p) {
                 Var r = Sigmoid(p[1]), f = Sigmoid(p[2]);
                 return GuideLoss(BackgroundAttention(p[0]), r, f,
                                  Scale(Add(r, f), 0.5));
               }),
      LossCase("coactivity", {{6, 12}, {4, 6}, {7, 12}, {4, 7}, {5, 12}, {4, 5}},
               [](auto p) {
                 static const LabelVector a(3, {0, 1}), b(3, {1}), c(3, {0, 2});
                 std::vector<CoActivityItem> batch{
                     {p[0], p[1], &a}, {p[2], p[3], &b}, {p[4], p[5], &c}};
                 return CoActivityLoss(batch, 0.5);
               }),
  };
  for (QsDistance d : {QsDistance::kCosine, QsDistance::kJensenShannon,
                       QsDistance::kEuclidean, QsDistance::kManhattan}) {
    cases.push_back(LossCase(
        "query_similarity_" + std::string(QsDistanceName(d)), {{4, 6}, {4, 6}, {4, 6}},
        [d](auto p) {
          std::vector<LabelVector> labels{LabelVector(3, {0}), LabelVector(3, {0, 2}),
                                          LabelVector(3, {2})};
          return QuerySimilarityLoss(p, labels, d);
        }));
  }
  cases.push_back(JointCase("joint_video_specific", QueryMode::kVideoSpecific));
  cases.push_back(JointCase("joint_uniform", QueryMode::kUniform));
  return cases;
}

}  // namespace

std::vector<GradCheckResult> RunGradientSuite(int seeds, std::uint64_t base_seed) {
  const std::vector<Case> cases = BuildCases();
  std::vector<GradCheckResult> results;
  std::mt19937_64 rng(base_seed);
  for (const Case& c : cases) {
    GradCheckResult r{c.name, 0.0, seeds};
    for (int s = 0; s < seeds; ++s) {
      std::vector<Tensor> point;
      for (const Shape& shape : c.shapes) point.push_back(Gaussian(shape, rng));
      const std::uint64_t proj_seed = rng();
      const double err = FiniteDiffCheck(
          [&](Tape&, std::span<const Var> p) { return c.fn(p, proj_seed); }, point);
      r.max_error = std::max(r.max_error, err);
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace vqk
