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
#ifndef VQK_SYNTHETIC_H_
#define VQK_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vqk/dataset.h"

namespace vqk {

struct SyntheticSpec {
  int num_classes = 3;
  int train_videos = 50;
  int test_videos = 20;
  int min_steps = 60;
  int max_steps = 60;
  int feature_dim = 32;
  // Planted instances per video and their length in segments.
  int min_instances = 1;
  int max_instances = 3;
  int min_instance_length = 4;
  int max_instance_length = 12;
  // Probability that a video carries a second action class.
  double second_class_prob = 0.25;
  double noise = 0.1;
  // Spread of the per-video scene around the shared background signature.
  double scene_scale = 0.3;
  double fps = 25.0;
  int frames_per_segment = 16;
  // Minimum pairwise cosine distance between class prototypes and the
  // background signature.
  double min_prototype_distance = 0.5;

  void Validate() const;
};

struct SyntheticDataset {
  Dataset train;
  Dataset test;
  std::vector<Tensor> prototypes;  // one [D] vector per class
  Tensor background;               // shared background signature
};

// Seeded generation; identical seeds give identical datasets. Feature values
// are rounded to f32 so in-memory data matches what is written to disk.
//
// Each video has a scene vector b = g + scene_scale * N(0, 1), where g is a
// background signature shared by all videos. At segment t with instance weight
// w_t (1 inside a planted span, 0.5 one segment outside each edge, else 0)
// the feature is w_t * prototype + (1 - w_t) * b + noise * N(0, 1).
SyntheticDataset GenerateSynthetic(const SyntheticSpec& spec, std::uint64_t seed);

// Writes train.json, test.json and features/<id>.vqkf under `dir`.
void WriteSyntheticDataset(const SyntheticDataset& dataset, const std::filesystem::path& dir);

}  // namespace vqk

#endif  // VQK_SYNTHETIC_H_
