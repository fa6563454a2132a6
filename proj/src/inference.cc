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
#include "vqk/inference.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"
#include "vqk/autograd.h"
#include "vqk/features.h"
#include "vqk/losses.h"
#include "vqk/ops.h"

namespace vqk {

std::vector<double> InferenceConfig::DefaultProposalThresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 10; ++i) t.push_back((10 + 8 * i) / 100.0);
  return t;
}

void InferenceConfig::Validate() const {
  if (!(class_threshold >= 0.0 && class_threshold <= 1.0)) {
    throw ConfigError("inference: class_threshold must be in [0, 1]");
  }
  if (thresholds.empty()) throw ConfigError("inference: no proposal thresholds");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) {
      throw ConfigError("inference: proposal threshold " + std::to_string(thresholds[i]) +
                        " outside (0, 1)");
    }
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw ConfigError("inference: proposal thresholds must be strictly increasing");
    }
  }
  if (!(nms_iou >= 0.0 && nms_iou <= 1.0)) throw ConfigError("inference: nms_iou must be in [0, 1]");
  if (!(oic_inflation >= 0.0)) throw ConfigError("inference: oic_inflation must be >= 0");
  if (!std::isfinite(min_score)) throw ConfigError("inference: min_score must be finite");
  if (!std::isfinite(class_prob_weight)) {
    throw ConfigError("inference: class_prob_weight must be finite");
  }
  if (frames_per_segment < 1) throw ConfigError("inference: frames_per_segment must be >= 1");
}

Tensor VideoClassProbs(const Tensor& a_hat, int m) {
  Tape tape;
  const Tensor pmf = ClassPmf(TopkVideoScores(tape.Constant(a_hat), m)).value();
  const std::size_t c = a_hat.dim(0) - 1;
  std::vector<double> fg(pmf.values().begin(), pmf.values().begin() + c);
  return Tensor::Vector(std::move(fg));
}

std::vector<std::pair<std::size_t, std::size_t>> ExtractSegments(std::span<const double> s,
                                                                  double threshold) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t t = 0;
  while (t < s.size()) {
    if (s[t] >= threshold) {
      std::size_t end = t;
      while (end + 1 < s.size() && s[end + 1] >= threshold) ++end;
      runs.emplace_back(t, end);
      t = end + 1;
    } else {
      ++t;
    }
  }
  return runs;
}

double OicScore(std::span<const double> row, std::size_t start, std::size_t end,
                double inflation) {
  if (start > end || end >= row.size()) {
    throw ArgumentError("oic_score: bad range [" + std::to_string(start) + ", " +
                        std::to_string(end) + "] for T=" + std::to_string(row.size()));
  }
  const std::size_t len = end - start + 1;
  const auto collar = static_cast<std::size_t>(std::ceil(inflation * static_cast<double>(len)));
  double inner = 0.0;
  for (std::size_t t = start; t <= end; ++t) inner += row[t];
  inner /= static_cast<double>(len);

  const std::size_t lo = start >= collar ? start - collar : 0;
  const std::size_t hi = std::min(row.size() - 1, end + collar);
  double outer = 0.0;
  std::size_t count = 0;
  for (std::size_t t = lo; t < start; ++t, ++count) outer += row[t];
  for (std::size_t t = end + 1; t <= hi; ++t, ++count) outer += row[t];
  return inner - (count ? outer / static_cast<double>(count) : 0.0);
}

std::vector<ActionProposal> SoftNms(std::vector<ActionProposal> proposals, double iou_threshold,
                                    double min_score) {
  std::map<std::pair<std::string, int>, std::vector<ActionProposal>> groups;
  for (ActionProposal& p : proposals) groups[{p.video, p.class_id}].push_back(std::move(p));

  std::vector<ActionProposal> kept;
  for (auto& [key, remaining] : groups) {
    while (!remaining.empty()) {
      SortProposals(remaining);
      ActionProposal top = remaining.front();
      remaining.erase(remaining.begin());
      if (top.score <= min_score) break;  // sorted: nothing left survives
      for (ActionProposal& other : remaining) {
        const double iou = Tiou(top.t_start, top.t_end, other.t_start, other.t_end);
        if (iou > iou_threshold) other.score *= 1.0 - iou;
      }
      kept.push_back(std::move(top));
    }
  }
  SortProposals(kept);
  return kept;
}

std::vector<ActionProposal> Localize(const Tensor& s, const Tensor& a_hat,
                                     const std::string& video, double fps, int m,
                                     const InferenceConfig& config) {
  if (s.rank() != 1 || a_hat.rank() != 2 || a_hat.dim(1) != s.size() || a_hat.dim(0) < 2) {
    throw DimensionError("localize: s " + ShapeToString(s.shape()) + " vs a_hat " +
                         ShapeToString(a_hat.shape()));
  }
  if (!(fps > 0.0)) throw ArgumentError("localize: fps must be positive");
  const Tensor probs = VideoClassProbs(a_hat, m);
  const std::size_t steps = s.size();
  const double seconds = static_cast<double>(config.frames_per_segment) / fps;

  std::vector<ActionProposal> pooled;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    if (probs[c] < config.class_threshold) continue;
    std::span<const double> row(a_hat.values().data() + c * steps, steps);
    for (double thr : config.thresholds) {
      for (const auto& [start, end] : ExtractSegments(s.data(), thr)) {
        ActionProposal p;
        p.video = video;
        p.class_id = static_cast<int>(c);
        p.t_start = static_cast<double>(start) * seconds;
        p.t_end = static_cast<double>(end + 1) * seconds;
        p.score = OicScore(row, start, end, config.oic_inflation) +
                  config.class_prob_weight * probs[c];
        pooled.push_back(std::move(p));
      }
    }
  }
  return SoftNms(std::move(pooled), config.nms_iou, config.min_score);
}

VideoScores ScoreVideo(const ModelParams& params, const Tensor& features,
                       const ModelConfig& model, QueryMode mode) {
  Tape tape;
  const ModelVars vars = BindParams(tape, params, /*trainable=*/false);
  const ModelOutputs out = Forward(tape.Constant(features), vars, model, mode);
  return {out.s.value(), out.suppressed_cam.value()};
}

std::vector<ActionProposal> InferDataset(const ModelParams& params, const Dataset& dataset,
                                         const ModelConfig& model, QueryMode mode, int m,
                                         const InferenceConfig& config) {
  config.Validate();
  std::vector<ActionProposal> all;
  for (const VideoRecord& v : dataset.videos) {
    const VideoScores scores = ScoreVideo(params, v.features, model, mode);
    std::vector<ActionProposal> p = Localize(scores.s, scores.a_hat, v.id, v.fps, m, config);
    all.insert(all.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  }
  SortProposals(all);
  return all;
}

void WriteProposals(const std::filesystem::path& path, std::span<const ActionProposal> proposals,
                    const std::vector<std::string>& classes) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write proposals " + path.string());
  for (const ActionProposal& p : proposals) {
    if (p.class_id < 0 || static_cast<std::size_t>(p.class_id) >= classes.size()) {
      throw ConfigError("proposal class " + std::to_string(p.class_id) + " has no name");
    }
    nlohmann::ordered_json rec;
    rec["video"] = p.video;
    rec["class"] = classes[p.class_id];
    rec["t_start"] = p.t_start;
    rec["t_end"] = p.t_end;
    rec["score"] = p.score;
    out << rec.dump() << "\n";
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ActionProposal> ReadProposals(const std::filesystem::path& path,
                                          const std::vector<std::string>& classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open proposals " + path.string());
  std::vector<ActionProposal> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    ActionProposal p;
    std::string name;
    try {
      const nlohmann::json rec = nlohmann::json::parse(line);
      p.video = rec.at("video").get<std::string>();
      name = rec.at("class").get<std::string>();
      p.t_start = rec.at("t_start").get<double>();
      p.t_end = rec.at("t_end").get<double>();
      p.score = rec.at("score").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw IoError(where + ": malformed proposal: " + e.what());
    }
    const auto it = std::find(classes.begin(), classes.end(), name);
    if (it == classes.end()) throw ConfigError(where + ": unknown class '" + name + "'");
    p.class_id = static_cast<int>(it - classes.begin());
    if (!(p.t_end > p.t_start)) throw IoError(where + ": t_end must exceed t_start");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace vqk
