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
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "test_util.h"

namespace vqk {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int status;
  std::string output;
};

// Runs the CLI with stdout and stderr captured.
CliRun Cli(const std::string& args) {
  const std::string cmd = std::string(VQK_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[512];
  while (pipe && std::fgets(buf, sizeof(buf), pipe)) out += buf;
  const int raw = pipe ? pclose(pipe) : -1;
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(CliTest, SmokePipeline) {
  const fs::path dir = testing::ScratchDir("cli_smoke");
  const std::string d = dir.string();
  ASSERT_EQ(Cli("synth --out " + d + "/data --seed 3 --train-videos 12 --test-videos 4 "
                "--steps 24 --dim 16").status, 0);
  const CliRun train = Cli("train --manifest " + d + "/data/train.json --config " +
                        std::string(VQK_SOURCE_DIR) + "/configs/synthetic.json --epochs 2 " +
                        "--out " + d + "/m.ckpt --validation-manifest " + d + "/data/test.json");
  ASSERT_EQ(train.status, 0) << train.output;
  EXPECT_NE(train.output.find("epoch 2/2"), std::string::npos) << train.output;
  EXPECT_NE(Slurp(dir / "m.ckpt.log.jsonl").find("\"validation_map@0.5\""), std::string::npos);
  const CliRun infer = Cli("infer --checkpoint " + d + "/m.ckpt --manifest " + d +
                        "/data/test.json --out " + d + "/p.jsonl");
  ASSERT_EQ(infer.status, 0) << infer.output;
  const CliRun eval = Cli("eval --proposals " + d + "/p.jsonl --manifest " + d +
                       "/data/test.json --out " + d + "/report");
  ASSERT_EQ(eval.status, 0) << eval.output;
  const std::string kv = Slurp(dir / "report.kv");
  for (const char* key : {"map@0.10=", "map@0.50=", "map@0.95=", "band@0.1:0.5=",
                          "band@0.3:0.7=", "band@0.1:0.7=", "band@0.5:0.95="}) {
    EXPECT_NE(kv.find(key), std::string::npos) << key;
  }
  EXPECT_TRUE(fs::exists(dir / "report.txt"));
}

TEST(CliTest, MissingManifestNamesPath) {
  const fs::path dir = testing::ScratchDir("cli_missing");
  std::ofstream(dir / "p.jsonl") << "";
  const CliRun r = Cli("eval --proposals " + (dir / "p.jsonl").string() +
                    " --manifest /nonexistent/gt.json --out " + (dir / "r").string());
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("/nonexistent/gt.json"), std::string::npos) << r.output;
  EXPECT_EQ(std::count(r.output.begin(), r.output.end(), '\n'), 1) << r.output;
}

TEST(CliTest, UsageErrors) {
  EXPECT_NE(Cli("").status, 0);
  EXPECT_NE(Cli("dance").status, 0);
  EXPECT_NE(Cli("synth --out /tmp/x --bogus").status, 0);
  EXPECT_NE(Cli("train --manifest a.json --out b --mode sideways").status, 0);
  EXPECT_NE(Cli("train --manifest a.json --out b --qs-distance chebyshev").status, 0);
}

TEST(CliTest, ConfigMismatchFailsBeforeTraining) {
  const fs::path dir = testing::ScratchDir("cli_config");
  const std::string d = dir.string();
  ASSERT_EQ(Cli("synth --out " + d + "/data --train-videos 6 --test-videos 2 --steps 16 --dim 8")
                .status, 0);
  std::ofstream(dir / "bad.json") << R"({"model": {"num_classes": 7}})";
  CliRun r = Cli("train --manifest " + d + "/data/train.json --config " + d + "/bad.json --out " + d +
              "/m.ckpt");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("manifest has 3"), std::string::npos) << r.output;
  std::ofstream(dir / "typo.json") << R"({"train": {"epoch": 7}})";
  r = Cli("train --manifest " + d + "/data/train.json --config " + d + "/typo.json --out " + d +
          "/m.ckpt");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("train.epoch"), std::string::npos) << r.output;
  EXPECT_FALSE(fs::exists(dir / "m.ckpt"));
}

TEST(CliTest, GradcheckPrintsEveryCase) {
  const CliRun r = Cli("gradcheck --seeds 1");
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("joint_video_specific"), std::string::npos);
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos);
}

}  // namespace
}  // namespace vqk
