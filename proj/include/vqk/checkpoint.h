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
#ifndef VQK_CHECKPOINT_H_
#define VQK_CHECKPOINT_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqk/config.h"

namespace vqk {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Layout, all little-endian:
//   "VQKC" | u16 version | u32 n | n bytes of JSON {"config", "classes"}
//   u32 count | count x tensor
//   u64 optimizer step | u32 count | count x tensor named "m:<p>" / "v:<p>"
// tensor = u16 name length | name | u8 rank | rank x u32 dim | f64 data.
// Parameters appear in ForEachParam order.
struct Checkpoint {
  ExperimentConfig config;
  std::vector<std::string> classes;
  ModelParams params;
  OptimizerState optimizer;
};

void SaveCheckpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
// Throws CheckpointError on bad magic, version, truncation, or parameter
// names and shapes that disagree with the stored model config.
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace vqk

#endif  // VQK_CHECKPOINT_H_
