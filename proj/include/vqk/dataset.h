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
#ifndef VQK_DATASET_H_
#define VQK_DATASET_H_

// Dataset manifest, a JSON document:
//
//   {
//     "version": 1,
//     "classes": ["class_a", "class_b"],
//     "videos": [
//       {"id": "v0", "features": "features/v0.vqkf", "fps": 25.0,
//        "labels": ["class_a"],
//        "segments": [{"label": "class_a", "t_start": 1.28, "t_end": 3.2}]}
//     ]
//   }
//
// Feature paths are relative to the manifest's directory. "segments" is
// optional (absent for unannotated training data).

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqk/losses.h"
#include "vqk/tensor.h"

namespace vqk {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GroundTruthSegment {
  std::string video;
  int class_id = 0;
  double t_start = 0;
  double t_end = 0;
};

struct VideoRecord {
  std::string id;
  std::string feature_path;  // as written in the manifest
  double fps = 25.0;
  LabelVector label;
  std::vector<GroundTruthSegment> segments;
  Tensor features;  // [T x D]; empty until loaded
};

struct Dataset {
  std::vector<std::string> classes;
  std::vector<VideoRecord> videos;

  int num_classes() const { return static_cast<int>(classes.size()); }
  // Throws ManifestError for an unknown name.
  int ClassIndex(const std::string& name) const;
  std::vector<GroundTruthSegment> AllSegments() const;
};

// Parses and validates a manifest. Rejects unknown classes, duplicate ids,
// invalid segments and dangling feature paths before returning. Feature
// matrices are loaded when `load_features` is set.
Dataset LoadManifest(const std::filesystem::path& path, bool load_features = true);

// Writes the manifest only (not the feature files).
void SaveManifest(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace vqk

#endif  // VQK_DATASET_H_
