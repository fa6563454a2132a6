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
#include "vqk/config.h"

#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <random>

#include "oracles.h"
#include "test_util.h"
#include "vqk/autograd.h"
#include "vqk/checkpoint.h"
#include "vqk/features.h"

namespace vqk {
namespace {

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(ConfigTest, DefaultsEmbedded) {
  const std::string text = ConfigToJson(ExperimentConfig{});
  for (const char* key : {"\"alpha\": 5.0", "\"beta\": 0.8", "\"gamma\": 0.8", "\"m\": 7",
                          "\"batch_size\": 10", "\"t_train\": 500", "\"learning_rate\": 5e-05",
                          "\"weight_decay\": 0.001", "\"class_threshold\": 0.2",
                          "\"nms_iou\": 0.7", "\"mode\": \"video_specific\"",
                          "\"qs_distance\": \"cosine\"", "\"hidden_dim\": 512"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST(ConfigTest, RoundTripIsExact) {
  ExperimentConfig c;
  c.model.num_classes = 3;
  c.train.learning_rate = 1.0 / 3.0;
  c.train.seed = 0xfedcba9876543210ull;
  c.train.mode = QueryMode::kUniform;
  c.train.loss.qs_distance = QsDistance::kManhattan;
  c.inference.thresholds = {0.2, 0.4};
  const ExperimentConfig back = ParseConfig(ConfigToJson(c));
  EXPECT_EQ(ConfigToJson(back), ConfigToJson(c));
  EXPECT_EQ(back.train.learning_rate, 1.0 / 3.0);
  EXPECT_EQ(back.train.seed, 0xfedcba9876543210ull);
  EXPECT_EQ(back.train.mode, QueryMode::kUniform);
}

TEST(ConfigTest, PartialOverlayKeepsBase) {
  ExperimentConfig base;
  base.train.epochs = 9;
  const ExperimentConfig c =
      ParseConfig(R"({"train": {"loss": {"alpha": 2}}, "model": {"hidden_dim": 16}})", base);
  EXPECT_EQ(c.train.loss.alpha, 2.0);
  EXPECT_EQ(c.model.hidden_dim, 16);
  EXPECT_EQ(c.train.epochs, 9);
  EXPECT_EQ(c.train.loss.beta, 0.8);
}

TEST(ConfigTest, Rejections) {
  EXPECT_THROW(ParseConfig(R"({"train": {"epoch": 3}})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"extra": {}})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"train": {"epochs": "many"}})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"train": {"epochs": 2.5}})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"train": {"seed": -1}})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"train": 3})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"train": {"mode": "sideways"}})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"inference": {"thresholds": [0.5, 0.2]}})"), ConfigError);
  EXPECT_THROW(ParseConfig(R"({"inference": {"thresholds": ["x"]}})"), ConfigError);
  EXPECT_THROW(ParseConfig("{not json"), ConfigError);
  try {
    ParseConfig(R"({"train": {"loss": {"delta": 1}}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.loss.delta"), std::string::npos);
  }
}

TEST(ConfigTest, FileRoundTrip) {
  const auto dir = testing::ScratchDir("config");
  ExperimentConfig c;
  c.train.epochs = 4;
  SaveConfig(c, dir / "c.json");
  EXPECT_EQ(LoadConfig(dir / "c.json").train.epochs, 4);
  EXPECT_THROW(LoadConfig(dir / "missing.json"), IoError);
}

ModelConfig Tiny() {
  ModelConfig m;
  m.num_classes = 2;
  m.feature_dim = 8;
  m.hidden_dim = 4;
  return m;
}

Checkpoint SampleCheckpoint() {
  Checkpoint ck;
  ck.config.model = Tiny();
  ck.classes = {"a", "b"};
  ck.params = InitParams(ck.config.model, 5);
  std::mt19937_64 rng(5);
  ForEachParam(
      [&](const std::string&, Tensor& t) {
        ck.optimizer.m.push_back(oracle::RandomTensor(t.shape(), rng));
        ck.optimizer.v.push_back(oracle::RandomTensor(t.shape(), rng));
      },
      ck.params);
  ck.optimizer.step = 17;
  return ck;
}

TEST(CheckpointTest, RoundTripGivesIdenticalForward) {
  const auto dir = testing::ScratchDir("checkpoint");
  const Checkpoint ck = SampleCheckpoint();
  SaveCheckpoint(ck, dir / "a.ckpt");
  const Checkpoint back = LoadCheckpoint(dir / "a.ckpt");
  EXPECT_EQ(back.classes, ck.classes);
  EXPECT_EQ(back.optimizer.step, 17);
  EXPECT_EQ(back.optimizer.m, ck.optimizer.m);
  EXPECT_EQ(back.optimizer.v, ck.optimizer.v);
  EXPECT_EQ(ConfigToJson(back.config), ConfigToJson(ck.config));

  std::mt19937_64 rng(6);
  const Tensor x = oracle::RandomTensor({7, 8}, rng);
  for (QueryMode mode : {QueryMode::kVideoSpecific, QueryMode::kUniform}) {
    Tape t1, t2;
    const ModelOutputs a = Forward(t1.Constant(x), BindParams(t1, ck.params, false), Tiny(), mode);
    const ModelOutputs b =
        Forward(t2.Constant(x), BindParams(t2, back.params, false), Tiny(), mode);
    EXPECT_EQ(a.suppressed_cam.value(), b.suppressed_cam.value());
    EXPECT_EQ(a.s.value(), b.s.value());
  }
  SaveCheckpoint(back, dir / "b.ckpt");
  EXPECT_EQ(Slurp(dir / "a.ckpt"), Slurp(dir / "b.ckpt"));
}

TEST(CheckpointTest, EmptyOptimizerState) {
  const auto dir = testing::ScratchDir("checkpoint_fresh");
  Checkpoint ck = SampleCheckpoint();
  ck.optimizer = {};
  SaveCheckpoint(ck, dir / "a.ckpt");
  const Checkpoint back = LoadCheckpoint(dir / "a.ckpt");
  EXPECT_TRUE(back.optimizer.m.empty());
  EXPECT_EQ(back.optimizer.step, 0);
}

TEST(CheckpointTest, CorruptionErrors) {
  const auto dir = testing::ScratchDir("checkpoint_bad");
  SaveCheckpoint(SampleCheckpoint(), dir / "good.ckpt");
  const std::string good = Slurp(dir / "good.ckpt");
  auto write = [&](const std::string& name, const std::string& bytes) {
    std::ofstream(dir / name, std::ios::binary) << bytes;
    return dir / name;
  };
  std::string magic = good;
  magic[0] = 'X';
  EXPECT_THROW(LoadCheckpoint(write("magic.ckpt", magic)), CheckpointError);
  std::string version = good;
  version[4] = 9;
  EXPECT_THROW(LoadCheckpoint(write("version.ckpt", version)), CheckpointError);
  EXPECT_THROW(LoadCheckpoint(write("short.ckpt", good.substr(0, good.size() - 3))),
               CheckpointError);
  EXPECT_THROW(LoadCheckpoint(write("long.ckpt", good + "x")), CheckpointError);
  EXPECT_THROW(LoadCheckpoint(dir / "missing.ckpt"), IoError);

  Checkpoint wide = SampleCheckpoint();
  wide.config.model.hidden_dim = 6;  // stored tensors no longer fit
  SaveCheckpoint(wide, dir / "wide.ckpt");
  try {
    LoadCheckpoint(dir / "wide.ckpt");
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("shape"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace vqk
