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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracles.h"

namespace vqk {
namespace {

GroundTruthSegment Gt(const std::string& video, int c, double s, double e) {
  return {video, c, s, e};
}

ActionProposal Prop(const std::string& video, int c, double s, double e, double score) {
  return {video, c, s, e, score};
}

TEST(TiouTest, Examples) {
  EXPECT_DOUBLE_EQ(Tiou(0, 10, 5, 15), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(Tiou(2, 4, 2, 4), 1.0);
  EXPECT_DOUBLE_EQ(Tiou(0, 1, 2, 3), 0.0);
  EXPECT_DOUBLE_EQ(Tiou(0, 1, 1, 2), 0.0);
  EXPECT_THROW(Tiou(1, 1, 0, 2), ArgumentError);
  EXPECT_THROW(Tiou(0, 2, 3, 1), ArgumentError);
}

TEST(AveragePrecisionTest, Examples) {
  const std::vector<GroundTruthSegment> gts = {Gt("a", 0, 1, 3)};
  EXPECT_DOUBLE_EQ(AveragePrecision({Prop("a", 0, 1, 3, 0.5)}, gts, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(AveragePrecision({}, gts, 0.5), 0.0);
  // Right interval, wrong video.
  EXPECT_DOUBLE_EQ(AveragePrecision({Prop("b", 0, 1, 3, 0.5)}, gts, 0.5), 0.0);
  // FP ranked first halves the precision at the hit.
  EXPECT_DOUBLE_EQ(
      AveragePrecision({Prop("a", 0, 5, 6, 0.9), Prop("a", 0, 1, 3, 0.5)}, gts, 0.5), 0.5);
  // A duplicate cannot reuse a consumed gt.
  EXPECT_DOUBLE_EQ(
      AveragePrecision({Prop("a", 0, 1, 3, 0.9), Prop("a", 0, 1, 3, 0.5)}, gts, 0.5), 1.0);
  // No gts: nothing to recall.
  EXPECT_DOUBLE_EQ(AveragePrecision({Prop("a", 0, 1, 3, 0.5)}, {}, 0.5), 0.0);
}

TEST(AveragePrecisionTest, BestUnmatchedGtIsConsumed) {
  // Proposal overlaps g0 (tIoU 0.5) and g1 (tIoU 1). It must take g1, leaving
  // g0 for the second proposal.
  const std::vector<GroundTruthSegment> gts = {Gt("a", 0, 0, 4), Gt("a", 0, 2, 4)};
  const std::vector<ActionProposal> props = {Prop("a", 0, 2, 4, 0.9), Prop("a", 0, 0, 4, 0.8)};
  EXPECT_DOUBLE_EQ(AveragePrecision(props, gts, 0.9), 1.0);
}

TEST(AveragePrecisionTest, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const oracle::ApInstance inst = oracle::RandomApInstance(rng);
    const double thr = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    EXPECT_NEAR(AveragePrecision(inst.proposals, inst.gts, thr),
                oracle::ExhaustiveAp(inst.proposals, inst.gts, thr), 1e-12)
        << "trial " << trial;
  }
}

TEST(AveragePrecisionTest, NonIncreasingInThreshold) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const oracle::ApInstance inst = oracle::RandomApInstance(rng);
    double prev = 2.0;
    for (int i = 1; i <= 19; ++i) {
      const double ap = AveragePrecision(inst.proposals, inst.gts, i / 20.0);
      EXPECT_LE(ap, prev + 1e-12);
      prev = ap;
    }
  }
}

TEST(AveragePrecisionTest, EqualScorePermutationInvariant) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    oracle::ApInstance inst = oracle::RandomApInstance(rng);
    for (ActionProposal& p : inst.proposals) p.score = 0.5;
    const double base = AveragePrecision(inst.proposals, inst.gts, 0.3);
    std::shuffle(inst.proposals.begin(), inst.proposals.end(), rng);
    EXPECT_EQ(AveragePrecision(inst.proposals, inst.gts, 0.3), base);
  }
}

TEST(EvaluateTest, PerfectProposalsScoreOne) {
  const std::vector<std::string> classes = {"a", "b", "c"};
  const std::vector<GroundTruthSegment> gts = {Gt("v1", 0, 0, 2), Gt("v1", 1, 3, 5),
                                               Gt("v2", 0, 1, 4)};
  std::vector<ActionProposal> props;
  for (const auto& g : gts) props.push_back(Prop(g.video, g.class_id, g.t_start, g.t_end, 1.0));
  const EvalReport r = Evaluate(props, gts, classes, DefaultTiouThresholds());
  for (double m : r.map) EXPECT_DOUBLE_EQ(m, 1.0);
  EXPECT_FALSE(r.class_has_gt[2]);
  for (const MapBand& b : r.bands) EXPECT_DOUBLE_EQ(b.value, 1.0);
}

TEST(EvaluateTest, EmptyProposalsScoreZero) {
  const std::vector<GroundTruthSegment> gts = {Gt("v1", 0, 0, 2)};
  const EvalReport r = Evaluate({}, gts, {"a"}, DefaultTiouThresholds());
  for (double m : r.map) EXPECT_EQ(m, 0.0);
}

TEST(EvaluateTest, BandIsMeanOfMembers) {
  std::mt19937_64 rng(14);
  const oracle::ApInstance inst = oracle::RandomApInstance(rng);
  const EvalReport r = Evaluate(inst.proposals, inst.gts, {"a"}, DefaultTiouThresholds());
  ASSERT_EQ(r.thresholds.size(), 14u);
  ASSERT_EQ(r.bands.size(), 4u);
  const MapBand& band = r.bands[2];
  ASSERT_EQ(band.name, "0.1:0.7");
  double sum = 0;
  for (int i = 1; i <= 7; ++i) sum += r.MapAt(i / 10.0);
  EXPECT_NEAR(band.value, sum / 7.0, 1e-15);
  EXPECT_EQ(r.bands[3].thresholds.size(), 10u);
}

TEST(EvaluateTest, ClassesWithoutGtExcludedFromMean) {
  const std::vector<GroundTruthSegment> gts = {Gt("v", 0, 0, 2), Gt("v", 1, 4, 6)};
  const std::vector<ActionProposal> props = {Prop("v", 0, 0, 2, 1.0), Prop("v", 2, 4, 6, 1.0)};
  const EvalReport r = Evaluate(props, gts, {"a", "b", "c"}, std::vector<double>{0.5});
  EXPECT_DOUBLE_EQ(r.map[0], 0.5);
}

TEST(EvaluateTest, ClassMismatchIsConfigError) {
  const std::vector<GroundTruthSegment> gts = {Gt("v", 0, 0, 2)};
  EXPECT_THROW(Evaluate(std::vector{Prop("v", 3, 0, 1, 1)}, gts, {"a"}, DefaultTiouThresholds()),
               ConfigError);
  EXPECT_THROW(Evaluate({}, std::vector{Gt("v", 1, 0, 2)}, {"a"}, DefaultTiouThresholds()), ConfigError);
}

TEST(EvaluateTest, ReportWriters) {
  const std::vector<GroundTruthSegment> gts = {Gt("v", 0, 0, 2)};
  const EvalReport r =
      Evaluate(std::vector{Prop("v", 0, 0, 2, 1.0)}, gts, {"walk", "run"}, DefaultTiouThresholds());
  std::ostringstream kv, table;
  WriteReportKeyValues(r, kv);
  WriteReportTable(r, table);
  EXPECT_NE(kv.str().find("map@0.50=1.000000\n"), std::string::npos);
  EXPECT_NE(kv.str().find("band@0.1:0.7=1.000000\n"), std::string::npos);
  EXPECT_NE(kv.str().find("ap@0.55/walk=1.000000\n"), std::string::npos);
  EXPECT_EQ(kv.str().find("/run="), std::string::npos);
  EXPECT_NE(table.str().find("mAP@0.5:0.95 = 100.00"), std::string::npos);
}

}  // namespace
}  // namespace vqk
