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
#include "vqk/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "vqk/features.h"

namespace vqk {
namespace {

constexpr double kThresholdMatch = 1e-9;

std::string Fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Threshold label with at least two decimals: 0.50, 0.55, 0.10.
std::string ThresholdLabel(double t) {
  std::string s = Fixed(t, 2);
  if (std::abs(std::stod(s) - t) > kThresholdMatch) s = Fixed(t, 4);
  return s;
}

}  // namespace

double Tiou(double a_start, double a_end, double b_start, double b_end) {
  if (!(a_end > a_start) || !(b_end > b_start)) {
    throw ArgumentError("tiou: degenerate interval [" + std::to_string(a_start) + ", " +
                        std::to_string(a_end) + "] or [" + std::to_string(b_start) +
                        ", " + std::to_string(b_end) + "]");
  }
  const double inter = std::max(0.0, std::min(a_end, b_end) - std::max(a_start, b_start));
  const double uni = (a_end - a_start) + (b_end - b_start) - inter;
  return inter / uni;
}

void SortProposals(std::vector<ActionProposal>& proposals) {
  std::stable_sort(proposals.begin(), proposals.end(),
                   [](const ActionProposal& a, const ActionProposal& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.video != b.video) return a.video < b.video;
                     if (a.t_start != b.t_start) return a.t_start < b.t_start;
                     if (a.t_end != b.t_end) return a.t_end < b.t_end;
                     return a.class_id < b.class_id;
                   });
}

double AveragePrecision(std::vector<ActionProposal> proposals,
                        std::span<const GroundTruthSegment> gts, double threshold) {
  SortProposals(proposals);
  std::vector<bool> used(gts.size(), false);
  int hits = 0;
  double precision_sum = 0.0;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const ActionProposal& p = proposals[i];
    double best = -1.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].video != p.video) continue;
      const double iou = Tiou(p.t_start, p.t_end, gts[g].t_start, gts[g].t_end);
      if (iou > best) {
        best = iou;
        best_gt = g;
      }
    }
    if (best_gt < gts.size() && best >= threshold) {
      used[best_gt] = true;
      ++hits;
      precision_sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return precision_sum / std::max<double>(1.0, static_cast<double>(gts.size()));
}

double EvalReport::MapAt(double threshold) const {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (std::abs(thresholds[i] - threshold) < kThresholdMatch) return map[i];
  }
  throw ArgumentError("report has no tIoU threshold " + std::to_string(threshold));
}

std::vector<double> DefaultTiouThresholds() {
  std::vector<double> t;
  for (int i = 1; i <= 7; ++i) t.push_back(i / 10.0);
  for (int i = 11; i <= 19; ++i) t.push_back(i / 20.0);  // 0.55 .. 0.95
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end(),
                      [](double a, double b) { return std::abs(a - b) < kThresholdMatch; }),
          t.end());
  return t;
}

std::vector<MapBand> DefaultBands(std::span<const double> thresholds) {
  auto range = [](int lo, int hi, int denom) {
    std::vector<double> out;
    for (int i = lo; i <= hi; ++i) out.push_back(static_cast<double>(i) / denom);
    return out;
  };
  const std::vector<MapBand> all = {{"0.1:0.5", range(1, 5, 10), 0},
                                    {"0.3:0.7", range(3, 7, 10), 0},
                                    {"0.1:0.7", range(1, 7, 10), 0},
                                    {"0.5:0.95", range(10, 19, 20), 0}};
  std::vector<MapBand> out;
  for (const MapBand& band : all) {
    const bool covered = std::all_of(band.thresholds.begin(), band.thresholds.end(), [&](double t) {
      return std::any_of(thresholds.begin(), thresholds.end(),
                         [&](double u) { return std::abs(t - u) < kThresholdMatch; });
    });
    if (covered) out.push_back(band);
  }
  return out;
}

EvalReport Evaluate(std::span<const ActionProposal> proposals,
                    std::span<const GroundTruthSegment> gts,
                    const std::vector<std::string>& classes,
                    std::span<const double> thresholds) {
  const int num_classes = static_cast<int>(classes.size());
  std::vector<std::vector<ActionProposal>> by_class(num_classes);
  std::vector<std::vector<GroundTruthSegment>> gt_by_class(num_classes);
  for (const ActionProposal& p : proposals) {
    if (p.class_id < 0 || p.class_id >= num_classes) {
      throw ConfigError("evaluate: proposal class " + std::to_string(p.class_id) +
                        " outside the " + std::to_string(num_classes) + "-class vocabulary");
    }
    by_class[p.class_id].push_back(p);
  }
  for (const GroundTruthSegment& g : gts) {
    if (g.class_id < 0 || g.class_id >= num_classes) {
      throw ConfigError("evaluate: ground truth class " + std::to_string(g.class_id) +
                        " outside the " + std::to_string(num_classes) + "-class vocabulary");
    }
    gt_by_class[g.class_id].push_back(g);
  }

  EvalReport r;
  r.classes = classes;
  r.thresholds.assign(thresholds.begin(), thresholds.end());
  r.ap.assign(num_classes, std::vector<double>(thresholds.size(), 0.0));
  r.class_has_gt.assign(num_classes, false);
  r.map.assign(thresholds.size(), 0.0);
  int present = 0;
  for (int c = 0; c < num_classes; ++c) {
    r.class_has_gt[c] = !gt_by_class[c].empty();
    present += r.class_has_gt[c];
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      r.ap[c][t] = AveragePrecision(by_class[c], gt_by_class[c], thresholds[t]);
    }
  }
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    double sum = 0.0;
    for (int c = 0; c < num_classes; ++c)
      if (r.class_has_gt[c]) sum += r.ap[c][t];
    r.map[t] = present ? sum / present : 0.0;
  }
  r.bands = DefaultBands(thresholds);
  for (MapBand& band : r.bands) {
    double sum = 0.0;
    for (double t : band.thresholds) sum += r.MapAt(t);
    band.value = sum / static_cast<double>(band.thresholds.size());
  }
  return r;
}

void WriteReportTable(const EvalReport& report, std::ostream& out) {
  std::size_t width = 5;
  for (const std::string& c : report.classes) width = std::max(width, c.size());
  auto pad = [&](const std::string& s) { return s + std::string(width + 2 - s.size(), ' '); };
  out << pad("tIoU");
  for (double t : report.thresholds) out << ThresholdLabel(t) << "   ";
  out << "\n";
  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    out << pad(report.classes[c]);
    for (std::size_t t = 0; t < report.thresholds.size(); ++t) {
      out << (report.class_has_gt[c] ? Fixed(100 * report.ap[c][t], 1) : std::string("  -"));
      out << std::string(report.class_has_gt[c] ? 7 - Fixed(100 * report.ap[c][t], 1).size() : 4, ' ');
    }
    out << "\n";
  }
  out << pad("mAP");
  for (double m : report.map) {
    const std::string v = Fixed(100 * m, 1);
    out << v << std::string(7 - v.size(), ' ');
  }
  out << "\n";
  for (const MapBand& band : report.bands) {
    out << "mAP@" << band.name << " = " << Fixed(100 * band.value, 2) << "\n";
  }
}

void WriteReportKeyValues(const EvalReport& report, std::ostream& out) {
  for (std::size_t t = 0; t < report.thresholds.size(); ++t) {
    out << "map@" << ThresholdLabel(report.thresholds[t]) << "=" << Fixed(report.map[t], 6)
        << "\n";
  }
  for (const MapBand& band : report.bands) {
    out << "band@" << band.name << "=" << Fixed(band.value, 6) << "\n";
  }
  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    if (!report.class_has_gt[c]) continue;
    for (std::size_t t = 0; t < report.thresholds.size(); ++t) {
      out << "ap@" << ThresholdLabel(report.thresholds[t]) << "/" << report.classes[c] << "="
          << Fixed(report.ap[c][t], 6) << "\n";
    }
  }
}

void WriteReportFiles(const EvalReport& report, const std::filesystem::path& table_path,
                      const std::filesystem::path& kv_path) {
  std::ofstream table(table_path);
  if (!table) throw IoError("cannot write report " + table_path.string());
  WriteReportTable(report, table);
  std::ofstream kv(kv_path);
  if (!kv) throw IoError("cannot write report " + kv_path.string());
  WriteReportKeyValues(report, kv);
}

}  // namespace vqk
