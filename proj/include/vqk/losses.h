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
#ifndef VQK_LOSSES_H_
#define VQK_LOSSES_H_

#include <span>
#include <string_view>
#include <vector>

#include "vqk/autograd.h"
#include "vqk/model.h"

namespace vqk {

// Multi-hot video-level label over C foreground classes.
class LabelVector {
 public:
  LabelVector() = default;
  // `classes` are foreground class ids in [0, num_classes). Duplicates are
  // ignored. An empty list is allowed here; training losses reject it.
  LabelVector(int num_classes, std::vector<int> classes);

  int num_classes() const { return num_classes_; }
  const std::vector<int>& classes() const { return classes_; }
  bool empty() const { return classes_.empty(); }
  bool Contains(int c) const;
  // Shares at least one foreground class.
  bool Overlaps(const LabelVector& other) const;

  // (C+1)-length targets normalized to sum 1. The first sets the background
  // bit, the second clears it. Both throw ArgumentError on an empty label.
  Tensor BackgroundPositiveTarget() const;
  Tensor BackgroundNegativeTarget() const;

 private:
  int num_classes_ = 0;
  std::vector<int> classes_;
};

enum class QsDistance { kCosine, kJensenShannon, kEuclidean, kManhattan };

std::string_view QsDistanceName(QsDistance d);
QsDistance ParseQsDistance(std::string_view name);

struct LossWeights {
  double alpha = 5.0;   // query similarity
  double beta = 0.8;    // guide
  double gamma = 0.8;   // sparsity
  int m = 7;            // top-k divisor, k = max(1, floor(T / m))
  double cas_margin = 0.5;
  // Per-segment means for the sparsity and guide L1 norms; raw sums when
  // false.
  bool normalize_l1 = true;
  QsDistance qs_distance = QsDistance::kCosine;

  void Validate() const;
};

// k = max(1, floor(T / m)).
std::size_t TopkCount(std::size_t steps, int m);

// Per-class top-k mean over time of a [(C+1) x T] map; returns [C+1].
Var TopkVideoScores(Var cam, int m);

// Softmax over the class dimension.
Var ClassPmf(Var scores);

// Cross-entropy of class_pmf(topk_video_scores(cam)) against a target.
Var VideoClsBranch(Var cam, const Tensor& target, int m);

// Background-positive branch on A plus background-negative branch on A-hat.
Var VideoClsLoss(Var cam, Var suppressed_cam, const LabelVector& label, int m);

Var QueryDistance(Var a, Var b, QsDistance kind);

// Mean over categories with at least two member videos of the mean pairwise
// query distance within that category. Background is shared by all videos.
// Zero when no category has a pair.
Var QuerySimilarityLoss(std::span<const Var> queries,
                        std::span<const LabelVector> labels,
                        QsDistance kind = QsDistance::kCosine);

// 0.5 * (|s_rgb - sg(s_f)|^2 + |sg(s_rgb) - s_f|^2).
Var MutualLearningLoss(Var s_rgb, Var s_flow);

Var SparsityLoss(Var s_rgb, Var s_flow, Var s, bool normalize = true);

// Background row of the class-wise (column) softmax of A; returns [T].
Var BackgroundAttention(Var cam);

Var GuideLoss(Var background, Var s_rgb, Var s_flow, Var s,
              bool normalize = true);

struct CoActivityItem {
  Var fused;           // [T x D]
  Var suppressed_cam;  // [(C+1) x T]
  const LabelVector* label;
};

// Hinge on high/low attention feature distances over every video pair and
// every foreground class the pair shares. Zero when nothing is shared.
Var CoActivityLoss(std::span<const CoActivityItem> batch, double margin);

struct LossBreakdown {
  // Unweighted term values.
  double video_cls = 0, query_similarity = 0, mutual_learning = 0, guide = 0,
         coactivity = 0, sparsity = 0;
  // Each term's contribution to the total, after its weight.
  double weighted_video_cls = 0, weighted_query_similarity = 0,
         weighted_mutual_learning = 0, weighted_guide = 0,
         weighted_coactivity = 0, weighted_sparsity = 0;
  double total = 0;
};

struct JointLoss {
  Var total;
  LossBreakdown breakdown;
};

// L = VCLS + alpha QS + ML + beta G + CAS + gamma SP with per-video terms
// averaged over the batch. QS is skipped when `use_query_similarity` is
// false (uniform queries have no per-video variation).
JointLoss ComputeJointLoss(std::span<const ModelOutputs> outputs,
                           std::span<const LabelVector> labels,
                           const LossWeights& weights,
                           bool use_query_similarity = true);

}  // namespace vqk

#endif  // VQK_LOSSES_H_
