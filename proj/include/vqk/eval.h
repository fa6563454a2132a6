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
#ifndef VQK_EVAL_H_
#define VQK_EVAL_H_

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vqk/dataset.h"

namespace vqk {

struct ActionProposal {
  std::string video;
  int class_id = 0;  // foreground class index
  double t_start = 0;
  double t_end = 0;
  double score = 0;
};

// |a ∩ b| / |a ∪ b|. Throws ArgumentError when either interval has
// end <= start.
double Tiou(double a_start, double a_end, double b_start, double b_end);

// Score-descending order with ties broken by (video, t_start, t_end, class).
void SortProposals(std::vector<ActionProposal>& proposals);

// Greedy matching in score order: a proposal is a hit when its best
// unmatched ground truth in the same video reaches `threshold` (that ground
// truth is then consumed). AP = sum of precision at each hit / max(1, #gts).
// Inputs are for one class; proposals need not be pre-sorted.
double AveragePrecision(std::vector<ActionProposal> proposals,
                        std::span<const GroundTruthSegment> gts, double threshold);

struct MapBand {
  std::string name;                // e.g. "0.1:0.7"
  std::vector<double> thresholds;  // members, all present in the report
  double value = 0;

  bool operator==(const MapBand&) const = default;
};

struct EvalReport {
  std::vector<std::string> classes;
  std::vector<double> thresholds;
  std::vector<std::vector<double>> ap;  // [class][threshold]
  std::vector<bool> class_has_gt;
  std::vector<double> map;              // per threshold, over classes with gt
  std::vector<MapBand> bands;

  // mAP at a threshold in `thresholds` (matched to 1e-9).
  double MapAt(double threshold) const;
  bool operator==(const EvalReport&) const = default;
};

// 0.1 to 0.7 in steps of 0.1 plus 0.5 to 0.95 in steps of 0.05.
std::vector<double> DefaultTiouThresholds();

// Bands 0.1:0.5, 0.3:0.7, 0.1:0.7 and 0.5:0.95 whose members are all in
// `thresholds`.
std::vector<MapBand> DefaultBands(std::span<const double> thresholds);

// Throws ConfigError when a proposal or ground truth names a class outside
// the vocabulary.
EvalReport Evaluate(std::span<const ActionProposal> proposals,
                    std::span<const GroundTruthSegment> gts,
                    const std::vector<std::string>& classes,
                    std::span<const double> thresholds);

// Human-readable table.
void WriteReportTable(const EvalReport& report, std::ostream& out);
// One key=value per line: map@0.50, band@0.1:0.7, ap@0.50/<class>.
void WriteReportKeyValues(const EvalReport& report, std::ostream& out);
void WriteReportFiles(const EvalReport& report, const std::filesystem::path& table_path,
                      const std::filesystem::path& kv_path);

}  // namespace vqk

#endif  // VQK_EVAL_H_
