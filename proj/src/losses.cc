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
#include "vqk/losses.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "vqk/ops.h"

namespace vqk {
namespace {

Var Zero(Tape& tape) { return tape.Constant(Tensor::Scalar(0.0)); }

void RequireSameLength(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape() || a.value().rank() != 1) {
    throw DimensionError(std::string(op) + ": length mismatch " +
                         ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
}

Var L1(Var x, bool normalize) {
  Var total = Sum(Abs(x));
  return normalize ? Scale(total, 1.0 / static_cast<double>(x.value().size()))
                   : total;
}

Var Accumulate(Var acc, Var term) { return acc.valid() ? Add(acc, term) : term; }

Tensor NormalizedTarget(const LabelVector& label, bool background) {
  if (label.empty()) {
    throw ArgumentError("label has no foreground class");
  }
  Tensor t({static_cast<std::size_t>(label.num_classes() + 1)});
  for (int c : label.classes()) t[static_cast<std::size_t>(c)] = 1.0;
  if (background) t[static_cast<std::size_t>(label.num_classes())] = 1.0;
  double total = 0.0;
  for (double v : t.data()) total += v;
  for (double& v : t.data()) v /= total;
  return t;
}

}  // namespace

LabelVector::LabelVector(int num_classes, std::vector<int> classes)
    : num_classes_(num_classes), classes_(std::move(classes)) {
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
  for (int c : classes_) {
    if (c < 0 || c >= num_classes_) {
      throw ArgumentError("label: class " + std::to_string(c) +
                          " outside [0, " + std::to_string(num_classes_) + ")");
    }
  }
}

bool LabelVector::Contains(int c) const {
  return std::binary_search(classes_.begin(), classes_.end(), c);
}

bool LabelVector::Overlaps(const LabelVector& other) const {
  return std::any_of(classes_.begin(), classes_.end(),
                     [&](int c) { return other.Contains(c); });
}

Tensor LabelVector::BackgroundPositiveTarget() const {
  return NormalizedTarget(*this, true);
}

Tensor LabelVector::BackgroundNegativeTarget() const {
  return NormalizedTarget(*this, false);
}

std::string_view QsDistanceName(QsDistance d) {
  switch (d) {
    case QsDistance::kCosine: return "cosine";
    case QsDistance::kJensenShannon: return "jensen_shannon";
    case QsDistance::kEuclidean: return "euclidean";
    case QsDistance::kManhattan: return "manhattan";
  }
  return "cosine";
}

QsDistance ParseQsDistance(std::string_view name) {
  if (name == "cosine") return QsDistance::kCosine;
  if (name == "jensen_shannon") return QsDistance::kJensenShannon;
  if (name == "euclidean") return QsDistance::kEuclidean;
  if (name == "manhattan") return QsDistance::kManhattan;
  throw ConfigError("unknown query distance '" + std::string(name) + "'");
}

void LossWeights::Validate() const {
  if (alpha < 0 || beta < 0 || gamma < 0 || cas_margin < 0) {
    throw ConfigError("loss weights must be nonnegative");
  }
  if (m < 1) throw ConfigError("loss: m must be >= 1");
}

std::size_t TopkCount(std::size_t steps, int m) {
  return std::max<std::size_t>(1, steps / static_cast<std::size_t>(m));
}

Var TopkVideoScores(Var cam, int m) {
  if (cam.value().rank() != 2) {
    throw DimensionError("topk_video_scores: expected a matrix, got " +
                         ShapeToString(cam.shape()));
  }
  if (m < 1) throw ArgumentError("topk_video_scores: m must be >= 1");
  return TopkMeanRows(cam, TopkCount(cam.shape()[1], m));
}

Var ClassPmf(Var scores) { return SoftmaxRows(scores); }

Var VideoClsBranch(Var cam, const Tensor& target, int m) {
  Var log_pmf = LogSoftmaxRows(TopkVideoScores(cam, m));
  if (target.shape() != log_pmf.shape()) {
    throw DimensionError("video_cls_loss: target " +
                         ShapeToString(target.shape()) + " vs classes " +
                         ShapeToString(log_pmf.shape()));
  }
  return Scale(Dot(log_pmf, cam.tape().Constant(target)), -1.0);
}

Var VideoClsLoss(Var cam, Var suppressed_cam, const LabelVector& label, int m) {
  if (cam.shape() != suppressed_cam.shape()) {
    throw DimensionError("video_cls_loss: T-CAM shapes differ");
  }
  return Add(VideoClsBranch(cam, label.BackgroundPositiveTarget(), m),
             VideoClsBranch(suppressed_cam, label.BackgroundNegativeTarget(), m));
}

constexpr double kSqrtEps = 1e-12;

Var QueryDistance(Var a, Var b, QsDistance kind) {
  switch (kind) {
    case QsDistance::kCosine:
      return CosineDistance(a, b);
    case QsDistance::kEuclidean:
      return AddScalar(Sqrt(AddScalar(Sum(Square(Sub(a, b))), kSqrtEps)), -std::sqrt(kSqrtEps));
    case QsDistance::kManhattan:
      return Sum(Abs(Sub(a, b)));
    case QsDistance::kJensenShannon: {
      // Divergence between the softmax distributions of the two queries.
      Var p = SoftmaxRows(a);
      Var q = SoftmaxRows(b);
      Var mid = Scale(Add(p, q), 0.5);
      Var log_mid = Log(mid);
      Var kl_p = Dot(p, Sub(Log(p), log_mid));
      Var kl_q = Dot(q, Sub(Log(q), log_mid));
      return Scale(Add(kl_p, kl_q), 0.5);
    }
  }
  return CosineDistance(a, b);
}

Var QuerySimilarityLoss(std::span<const Var> queries,
                        std::span<const LabelVector> labels, QsDistance kind) {
  if (queries.empty()) throw ArgumentError("query_similarity_loss: empty batch");
  if (queries.size() != labels.size()) {
    throw DimensionError("query_similarity_loss: queries/labels count differ");
  }
  Tape& tape = queries[0].tape();
  const std::size_t num_queries = queries[0].shape()[0];
  const int background = static_cast<int>(num_queries) - 1;
  Var total;
  int categories = 0;
  for (int k = 0; k < static_cast<int>(num_queries); ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (k == background || labels[i].Contains(k)) members.push_back(i);
    }
    if (members.size() < 2) continue;
    Var sum;
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        sum = Accumulate(sum, QueryDistance(Row(queries[members[a]], k),
                                            Row(queries[members[b]], k), kind));
      }
    }
    const double pairs = members.size() * (members.size() - 1) / 2.0;
    total = Accumulate(total, Scale(sum, 1.0 / pairs));
    ++categories;
  }
  if (categories == 0) return Zero(tape);
  return Scale(total, 1.0 / categories);
}

Var MutualLearningLoss(Var s_rgb, Var s_flow) {
  RequireSameLength(s_rgb, s_flow, "mutual_learning_loss");
  Var rgb_term = Sum(Square(Sub(s_rgb, StopGradient(s_flow))));
  Var flow_term = Sum(Square(Sub(StopGradient(s_rgb), s_flow)));
  return Scale(Add(rgb_term, flow_term), 0.5);
}

Var SparsityLoss(Var s_rgb, Var s_flow, Var s, bool normalize) {
  RequireSameLength(s_rgb, s_flow, "sparsity_loss");
  RequireSameLength(s_rgb, s, "sparsity_loss");
  return Scale(Add(Add(L1(s_rgb, normalize), L1(s_flow, normalize)),
                   L1(s, normalize)),
               1.0 / 3.0);
}

Var BackgroundAttention(Var cam) {
  // Softmax over classes for each time step, then keep the background row.
  Var per_step = SoftmaxRows(Transpose(cam));
  return Column(per_step, cam.shape()[0] - 1);
}

Var GuideLoss(Var background, Var s_rgb, Var s_flow, Var s, bool normalize) {
  RequireSameLength(background, s_rgb, "guide_loss");
  RequireSameLength(background, s_flow, "guide_loss");
  RequireSameLength(background, s, "guide_loss");
  Var residual_base = AddScalar(Scale(background, -1.0), 1.0);
  Var total = Add(Add(L1(Sub(residual_base, s_rgb), normalize),
                      L1(Sub(residual_base, s_flow), normalize)),
                  L1(Sub(residual_base, s), normalize));
  return Scale(total, 1.0 / 3.0);
}

Var CoActivityLoss(std::span<const CoActivityItem> batch, double margin) {
  if (batch.empty()) throw ArgumentError("coactivity_loss: empty batch");
  Tape& tape = batch[0].fused.tape();

  struct Features {
    Var high;
    Var low;
  };
  std::map<std::pair<std::size_t, int>, Features> cache;
  auto features = [&](std::size_t i, int c) -> const Features& {
    auto it = cache.find({i, c});
    if (it != cache.end()) return it->second;
    const CoActivityItem& item = batch[i];
    const std::size_t steps = item.fused.shape()[0];
    const std::size_t dim = item.fused.shape()[1];
    Var attention = SoftmaxRows(Row(item.suppressed_cam, c));
    Var complement = AddScalar(Scale(attention, -1.0), 1.0);
    Var low_weights = DivByScalar(complement, Sum(complement));
    Var fused_t = Transpose(item.fused);
    Features f{
        Reshape(MatMul(fused_t, Reshape(attention, {steps, 1})), {dim}),
        Reshape(MatMul(fused_t, Reshape(low_weights, {steps, 1})), {dim})};
    return cache.emplace(std::make_pair(i, c), f).first->second;
  };

  Var total;
  std::size_t terms = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    // A single segment leaves no low-attention region to compare against.
    if (batch[i].fused.shape()[0] < 2) continue;
    for (std::size_t j = i + 1; j < batch.size(); ++j) {
      if (batch[j].fused.shape()[0] < 2) continue;
      for (int c : batch[i].label->classes()) {
        if (!batch[j].label->Contains(c)) continue;
        const Features& fi = features(i, c);
        const Features& fj = features(j, c);
        Var high_high = CosineDistance(fi.high, fj.high);
        Var first = Relu(AddScalar(
            Sub(high_high, CosineDistance(fi.high, fj.low)), margin));
        Var second = Relu(AddScalar(
            Sub(high_high, CosineDistance(fi.low, fj.high)), margin));
        total = Accumulate(total, Scale(Add(first, second), 0.5));
        ++terms;
      }
    }
  }
  if (terms == 0) return Zero(tape);
  return Scale(total, 1.0 / static_cast<double>(terms));
}

JointLoss ComputeJointLoss(std::span<const ModelOutputs> outputs,
                           std::span<const LabelVector> labels,
                           const LossWeights& weights,
                           bool use_query_similarity) {
  if (outputs.empty() || outputs.size() != labels.size()) {
    throw ArgumentError("joint_loss: need one label per output, non-empty");
  }
  Tape& tape = outputs[0].cam.tape();
  const double inv_n = 1.0 / static_cast<double>(outputs.size());

  Var vcls, ml, guide, sparsity;
  std::vector<Var> queries;
  std::vector<CoActivityItem> cas_items;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const ModelOutputs& o = outputs[i];
    vcls = Accumulate(vcls, VideoClsLoss(o.cam, o.suppressed_cam, labels[i],
                                         weights.m));
    ml = Accumulate(ml, MutualLearningLoss(o.s_rgb, o.s_flow));
    guide = Accumulate(guide, GuideLoss(BackgroundAttention(o.cam), o.s_rgb,
                                        o.s_flow, o.s, weights.normalize_l1));
    sparsity = Accumulate(sparsity, SparsityLoss(o.s_rgb, o.s_flow, o.s,
                                                 weights.normalize_l1));
    queries.push_back(o.queries);
    cas_items.push_back({o.fused, o.suppressed_cam, &labels[i]});
  }
  vcls = Scale(vcls, inv_n);
  ml = Scale(ml, inv_n);
  guide = Scale(guide, inv_n);
  sparsity = Scale(sparsity, inv_n);
  Var qs = use_query_similarity
               ? QuerySimilarityLoss(queries, labels, weights.qs_distance)
               : Zero(tape);
  Var cas = CoActivityLoss(cas_items, weights.cas_margin);

  Var total = Add(vcls, Scale(qs, weights.alpha));
  total = Add(total, ml);
  total = Add(total, Scale(guide, weights.beta));
  total = Add(total, cas);
  total = Add(total, Scale(sparsity, weights.gamma));

  LossBreakdown b;
  b.video_cls = vcls.value().item();
  b.query_similarity = qs.value().item();
  b.mutual_learning = ml.value().item();
  b.guide = guide.value().item();
  b.coactivity = cas.value().item();
  b.sparsity = sparsity.value().item();
  b.weighted_video_cls = b.video_cls;
  b.weighted_query_similarity = weights.alpha * b.query_similarity;
  b.weighted_mutual_learning = b.mutual_learning;
  b.weighted_guide = weights.beta * b.guide;
  b.weighted_coactivity = b.coactivity;
  b.weighted_sparsity = weights.gamma * b.sparsity;
  b.total = total.value().item();
  return {total, b};
}

}  // namespace vqk
