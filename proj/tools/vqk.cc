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
// Command-line driver: synth, train, infer, eval and gradcheck.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "vqk/checkpoint.h"
#include "vqk/config.h"
#include "vqk/dataset.h"
#include "vqk/eval.h"
#include "vqk/features.h"
#include "vqk/gradient_suite.h"
#include "vqk/inference.h"
#include "vqk/synthetic.h"
#include "vqk/trainer.h"

namespace fs = std::filesystem;

namespace vqk {
namespace {

struct Flags {
  std::string config;
  std::string manifest;
  std::string checkpoint;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string qs_distance;
  // train
  std::optional<int> epochs;
  std::string validation_manifest;
  std::string log;
  // eval
  std::string proposals;
  // synth
  SyntheticSpec spec;
  std::optional<int> steps;
  // gradcheck
  int seeds = 20;
};

void RequireFile(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing --") + what);
  if (!fs::exists(path)) throw IoError(std::string(what) + " not found: " + path);
}

int RunSynth(const Flags& f) {
  SyntheticSpec spec = f.spec;
  if (f.steps) spec.min_steps = spec.max_steps = *f.steps;
  const SyntheticDataset data = GenerateSynthetic(spec, f.seed.value_or(0));
  WriteSyntheticDataset(data, f.out);
  std::printf("wrote %zu train and %zu test videos to %s\n", data.train.videos.size(),
              data.test.videos.size(), f.out.c_str());
  return 0;
}

double ValidationMap(const ModelParams& params, const Dataset& data, const ExperimentConfig& c) {
  const auto props =
      InferDataset(params, data, c.model, c.train.mode, c.train.loss.m, c.inference);
  return Evaluate(props, data.AllSegments(), data.classes, DefaultTiouThresholds()).MapAt(0.5);
}

int RunTrain(const Flags& f) {
  RequireFile(f.manifest, "manifest");
  if (f.out.empty()) throw ConfigError("missing --out (checkpoint path)");
  const Dataset data = LoadManifest(f.manifest);
  if (data.videos.empty()) throw ManifestError(f.manifest + ": no videos");

  ExperimentConfig base;
  base.model.num_classes = data.num_classes();
  base.model.feature_dim = static_cast<int>(data.videos.front().features.dim(1));
  ExperimentConfig c = base;
  if (!f.config.empty()) {
    RequireFile(f.config, "config");
    c = LoadConfig(f.config, base);
    if (c.model.num_classes != base.model.num_classes ||
        c.model.feature_dim != base.model.feature_dim) {
      throw ConfigError(f.config + ": model is " + std::to_string(c.model.num_classes) +
                        " classes x " + std::to_string(c.model.feature_dim) +
                        " dims but the manifest has " + std::to_string(base.model.num_classes) +
                        " x " + std::to_string(base.model.feature_dim));
    }
  }
  if (f.seed) c.train.seed = *f.seed;
  if (f.epochs) c.train.epochs = *f.epochs;
  if (!f.mode.empty()) c.train.mode = ParseQueryMode(f.mode);
  if (!f.qs_distance.empty()) c.train.loss.qs_distance = ParseQsDistance(f.qs_distance);
  c.Validate();

  std::optional<Dataset> validation;
  if (!f.validation_manifest.empty()) {
    RequireFile(f.validation_manifest, "validation-manifest");
    validation = LoadManifest(f.validation_manifest);
  }
  const std::string log_path = f.log.empty() ? f.out + ".log.jsonl" : f.log;
  std::ofstream log(log_path);
  if (!log) throw IoError("cannot write log " + log_path);

  auto on_epoch = [&](const ModelParams& params, EpochLog& e) {
    if (validation) e.validation_map = ValidationMap(params, *validation, c);
    nlohmann::ordered_json rec = {{"epoch", e.epoch},
                                  {"batches", e.batches},
                                  {"total", e.mean.total},
                                  {"video_cls", e.mean.video_cls},
                                  {"query_similarity", e.mean.query_similarity},
                                  {"mutual_learning", e.mean.mutual_learning},
                                  {"guide", e.mean.guide},
                                  {"coactivity", e.mean.coactivity},
                                  {"sparsity", e.mean.sparsity}};
    if (e.validation_map) rec["validation_map@0.5"] = *e.validation_map;
    log << rec.dump() << "\n" << std::flush;
    std::fprintf(stderr, "epoch %d/%d loss %.5f%s\n", e.epoch, c.train.epochs, e.mean.total,
                 e.validation_map ? (" val mAP@0.5 " + std::to_string(*e.validation_map)).c_str()
                                  : "");
  };
  TrainResult result = Train(data, c.model, c.train, on_epoch);
  SaveCheckpoint({c, data.classes, std::move(result.params), std::move(result.optimizer)},
                 f.out);
  std::printf("wrote checkpoint %s and log %s\n", f.out.c_str(), log_path.c_str());
  return 0;
}

int RunInfer(const Flags& f) {
  RequireFile(f.checkpoint, "checkpoint");
  RequireFile(f.manifest, "manifest");
  if (f.out.empty()) throw ConfigError("missing --out (proposal file)");
  Checkpoint ck = LoadCheckpoint(f.checkpoint);
  if (!f.config.empty()) {
    RequireFile(f.config, "config");
    const ExperimentConfig c = LoadConfig(f.config, ck.config);
    if (ConfigToJson({c.model, c.train, {}}) != ConfigToJson({ck.config.model, ck.config.train, {}})) {
      throw ConfigError(f.config + ": only the inference section can change after training");
    }
    ck.config = c;
  }
  const Dataset data = LoadManifest(f.manifest);
  if (data.classes != ck.classes) {
    throw ConfigError(f.manifest + ": class vocabulary differs from the checkpoint's");
  }
  for (const VideoRecord& v : data.videos) {
    if (static_cast<int>(v.features.dim(1)) != ck.config.model.feature_dim) {
      throw ConfigError(v.feature_path + ": feature width " + std::to_string(v.features.dim(1)) +
                        ", model expects " + std::to_string(ck.config.model.feature_dim));
    }
  }
  const ExperimentConfig& c = ck.config;
  const auto props = InferDataset(ck.params, data, c.model, c.train.mode, c.train.loss.m, c.inference);
  WriteProposals(f.out, props, data.classes);
  std::printf("wrote %zu proposals to %s\n", props.size(), f.out.c_str());
  return 0;
}

int RunEval(const Flags& f) {
  RequireFile(f.proposals, "proposals");
  RequireFile(f.manifest, "manifest");
  if (f.out.empty()) throw ConfigError("missing --out (report path prefix)");
  const Dataset data = LoadManifest(f.manifest, /*load_features=*/false);
  const auto props = ReadProposals(f.proposals, data.classes);
  const EvalReport report =
      Evaluate(props, data.AllSegments(), data.classes, DefaultTiouThresholds());
  const fs::path table = f.out + ".txt", kv = f.out + ".kv";
  if (table.has_parent_path()) fs::create_directories(table.parent_path());
  WriteReportFiles(report, table, kv);
  WriteReportTable(report, std::cout);
  std::printf("wrote %s and %s\n", table.string().c_str(), kv.string().c_str());
  return 0;
}

int RunGradcheck(const Flags& f) {
  if (f.seeds < 1) throw ConfigError("--seeds must be >= 1");
  bool ok = true;
  for (const GradCheckResult& r : RunGradientSuite(f.seeds, f.seed.value_or(0))) {
    const bool pass = r.max_error < kGradCheckTolerance;
    ok &= pass;
    std::printf("%-32s max_rel_error %.3e  %s\n", r.name.c_str(), r.max_error,
                pass ? "ok" : "FAIL");
  }
  return ok ? 0 : 1;
}

}  // namespace
}  // namespace vqk

int main(int argc, char** argv) {
  using vqk::Flags;
  Flags f;
  CLI::App app{"Weakly-supervised temporal action localization with video-specific queries"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", f.seed, "Random seed");
  };
  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON config overlaid on the built-in defaults");
    sub->add_option("--mode", f.mode, "Query learning mode")
        ->check(CLI::IsMember({"video_specific", "uniform"}));
    sub->add_option("--qs-distance", f.qs_distance, "Query similarity distance")
        ->check(CLI::IsMember({"cosine", "jensen_shannon", "euclidean", "manhattan"}));
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--out", f.out, "Output directory")->required();
  add_common(synth);
  synth->add_option("--classes", f.spec.num_classes, "Number of action classes");
  synth->add_option("--train-videos", f.spec.train_videos, "Training videos");
  synth->add_option("--test-videos", f.spec.test_videos, "Test videos");
  synth->add_option("--steps", f.steps, "Segments per video");
  synth->add_option("--dim", f.spec.feature_dim, "Feature width");
  synth->add_option("--noise", f.spec.noise, "Gaussian noise level");

  CLI::App* train = app.add_subcommand("train", "Train from a manifest");
  train->add_option("--manifest", f.manifest, "Training manifest")->required();
  train->add_option("--out", f.out, "Checkpoint path")->required();
  add_common(train);
  add_model_flags(train);
  train->add_option("--epochs", f.epochs, "Override train.epochs");
  train->add_option("--validation-manifest", f.validation_manifest,
                    "Manifest scored with mAP@0.5 after every epoch");
  train->add_option("--log", f.log, "Epoch log path (default <out>.log.jsonl)");

  CLI::App* infer = app.add_subcommand("infer", "Write proposals for a manifest");
  infer->add_option("--checkpoint", f.checkpoint, "Trained checkpoint")->required();
  infer->add_option("--manifest", f.manifest, "Manifest to localize")->required();
  infer->add_option("--out", f.out, "Proposal file (JSON lines)")->required();
  infer->add_option("--config", f.config, "Config overriding the inference section");

  CLI::App* eval = app.add_subcommand("eval", "Score proposals against a manifest");
  eval->add_option("--proposals", f.proposals, "Proposal file")->required();
  eval->add_option("--manifest", f.manifest, "Ground-truth manifest")->required();
  eval->add_option("--out", f.out, "Report prefix; writes <out>.txt and <out>.kv")->required();

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Run the finite-difference suite");
  gradcheck->add_option("--seeds", f.seeds, "Random instances per case");
  add_common(gradcheck);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) return vqk::RunSynth(f);
    if (*train) return vqk::RunTrain(f);
    if (*infer) return vqk::RunInfer(f);
    if (*eval) return vqk::RunEval(f);
    if (*gradcheck) return vqk::RunGradcheck(f);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "vqk: error: %s\n", e.what());
    return 1;
  }
  return 1;
}
