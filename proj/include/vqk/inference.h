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
#ifndef VQK_INFERENCE_H_
#define VQK_INFERENCE_H_

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vqk/dataset.h"
#include "vqk/eval.h"
#include "vqk/model.h"

namespace vqk {

struct InferenceConfig {
  double class_threshold = 0.2;
  std::vector<double> thresholds = DefaultProposalThresholds();
  double nms_iou = 0.7;
  double oic_inflation = 0.25;
  double min_score = 0.0;
  // Proposal score is OIC + class_prob_weight * p(class). Zero keeps pure OIC.
  double class_prob_weight = 0.0;
  int frames_per_segment = 16;

  // 0.1, 0.18, ..., 0.9.
  static std::vector<double> DefaultProposalThresholds();
  void Validate() const;
};

// class_pmf(topk_video_scores(a_hat, m)) without the background entry: [C].
Tensor VideoClassProbs(const Tensor& a_hat, int m);

// Maximal runs of s[t] >= threshold as inclusive index pairs.
std::vector<std::pair<std::size_t, std::size_t>> ExtractSegments(std::span<const double> s,
                                                                  double threshold);

// Inner mean over [start, end] minus the mean over ceil(inflation * len)
// segments on each side (clipped). An empty collar has mean 0.
double OicScore(std::span<const double> row, std::size_t start, std::size_t end,
                double inflation);

// Linear soft-NMS per (video, class). Output is score-sorted.
std::vector<ActionProposal> SoftNms(std::vector<ActionProposal> proposals, double iou_threshold,
                                    double min_score);

// Proposals for one video from its foreground score s [T] and A-hat
// [(C+1) x T].
std::vector<ActionProposal> Localize(const Tensor& s, const Tensor& a_hat,
                                     const std::string& video, double fps, int m,
                                     const InferenceConfig& config);

struct VideoScores {
  Tensor s;      // [T]
  Tensor a_hat;  // [(C+1) x T]
};

VideoScores ScoreVideo(const ModelParams& params, const Tensor& features,
                       const ModelConfig& model, QueryMode mode);

std::vector<ActionProposal> InferDataset(const ModelParams& params, const Dataset& dataset,
                                         const ModelConfig& model, QueryMode mode, int m,
                                         const InferenceConfig& config);

// One JSON object per line with fields in the order video, class, t_start,
// t_end, score. Class is written by name.
void WriteProposals(const std::filesystem::path& path, std::span<const ActionProposal> proposals,
                    const std::vector<std::string>& classes);
// Throws ConfigError for class names outside `classes` and IoError for
// unreadable or malformed files (message names the line).
std::vector<ActionProposal> ReadProposals(const std::filesystem::path& path,
                                          const std::vector<std::string>& classes);

}  // namespace vqk

#endif  // VQK_INFERENCE_H_
