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
#ifndef VQK_CONFIG_H_
#define VQK_CONFIG_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "vqk/inference.h"
#include "vqk/model.h"
#include "vqk/trainer.h"

namespace vqk {

struct ExperimentConfig {
  ModelConfig model;
  TrainConfig train;
  InferenceConfig inference;

  void Validate() const;
};

// Pretty JSON with every field present:
// {"model": {...}, "train": {..., "loss": {...}}, "inference": {...}}.
std::string ConfigToJson(const ExperimentConfig& config);

// Overlays the keys present in `text` onto `base`. Unknown keys, wrong value
// types and unparsable text throw ConfigError. The result is validated.
ExperimentConfig ParseConfig(std::string_view text, const ExperimentConfig& base = {});

ExperimentConfig LoadConfig(const std::filesystem::path& path,
                            const ExperimentConfig& base = {});
void SaveConfig(const ExperimentConfig& config, const std::filesystem::path& path);

}  // namespace vqk

#endif  // VQK_CONFIG_H_
