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
#include "vqk/synthetic.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "vqk/features.h"

namespace vqk {
namespace {

double Cosine(const Tensor& a, const Tensor& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return 1.0 - dot / std::sqrt(na * nb);
}

Tensor Gaussian(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor t({dim});
  for (double& x : t.data()) x = n(rng);
  return t;
}

int Uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

struct Span {
  int start;
  int end;  // inclusive
  int cls;
};

// Non-overlapping spans with at least one free segment between them.
std::vector<Span> PlaceSpans(const SyntheticSpec& spec, int steps,
                             const std::vector<int>& classes, std::mt19937_64& rng) {
  std::vector<Span> spans;
  const int count = std::max<int>(static_cast<int>(classes.size()),
                                  Uniform(rng, spec.min_instances, spec.max_instances));
  for (int i = 0; i < count; ++i) {
    const int cls = i < static_cast<int>(classes.size())
                        ? classes[i]
                        : classes[Uniform(rng, 0, static_cast<int>(classes.size()) - 1)];
    for (int attempt = 0; attempt < 100; ++attempt) {
      const int len = std::min(
          steps, Uniform(rng, spec.min_instance_length, spec.max_instance_length));
      const int start = Uniform(rng, 0, steps - len);
      const Span s{start, start + len - 1, cls};
      const bool clear = std::none_of(spans.begin(), spans.end(), [&](const Span& o) {
        return s.start <= o.end + 1 && o.start <= s.end + 1;
      });
      if (clear) {
        spans.push_back(s);
        break;
      }
    }
  }
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.start < b.start; });
  return spans;
}

Dataset MakeSplit(const SyntheticSpec& spec, const std::vector<Tensor>& prototypes,
                  const Tensor& background, const std::vector<std::string>& class_names,
                  int videos,
                  const std::string& prefix, std::mt19937_64& rng) {
  Dataset ds;
  ds.classes = class_names;
  const std::size_t dim = static_cast<std::size_t>(spec.feature_dim);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::bernoulli_distribution second(spec.second_class_prob);
  for (int v = 0; v < videos; ++v) {
    VideoRecord rec;
    rec.id = prefix + "_" + std::to_string(v);
    rec.feature_path = "features/" + rec.id + ".vqkf";
    rec.fps = spec.fps;
    const int steps = Uniform(rng, spec.min_steps, spec.max_steps);

    std::vector<int> classes{Uniform(rng, 0, spec.num_classes - 1)};
    if (spec.num_classes > 1 && second(rng)) {
      int extra = Uniform(rng, 0, spec.num_classes - 2);
      if (extra >= classes[0]) ++extra;
      classes.push_back(extra);
    }
    std::vector<Span> spans = PlaceSpans(spec, steps, classes, rng);
    // A class whose span did not fit is dropped from the label.
    std::vector<int> placed;
    for (const Span& s : spans) placed.push_back(s.cls);
    rec.label = LabelVector(spec.num_classes, placed);

    std::vector<double> weight(steps, 0.0);
    std::vector<int> owner(steps, -1);
    for (const Span& s : spans) {
      for (int t = s.start; t <= s.end; ++t) {
        weight[t] = 1.0;
        owner[t] = s.cls;
      }
      for (int t : {s.start - 1, s.end + 1}) {
        if (t >= 0 && t < steps && owner[t] < 0) {
          weight[t] = 0.5;
          owner[t] = s.cls;
        }
      }
      const double seg = spec.frames_per_segment / spec.fps;
      rec.segments.push_back({rec.id, s.cls, s.start * seg, (s.end + 1) * seg});
    }

    Tensor scene = Gaussian(dim, rng);
    for (std::size_t d = 0; d < dim; ++d)
      scene[d] = background[d] + spec.scene_scale * scene[d];
    Tensor x({static_cast<std::size_t>(steps), dim});
    for (int t = 0; t < steps; ++t) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double proto = owner[t] >= 0 ? prototypes[owner[t]][d] : 0.0;
        x.at(t, d) = weight[t] * proto + (1.0 - weight[t]) * scene[d] +
                     spec.noise * noise(rng);
      }
    }
    rec.features = RoundToFloat(std::move(x));
    ds.videos.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace

void SyntheticSpec::Validate() const {
  if (num_classes < 1) throw ConfigError("synthetic: num_classes must be >= 1");
  if (train_videos < 0 || test_videos < 0) {
    throw ConfigError("synthetic: video counts must be nonnegative");
  }
  if (min_steps < 1 || max_steps < min_steps) {
    throw ConfigError("synthetic: need 1 <= min_steps <= max_steps");
  }
  if (feature_dim < 2 || feature_dim % 2 != 0) {
    throw ConfigError("synthetic: feature_dim must be even and >= 2");
  }
  if (min_instances < 1 || max_instances < min_instances) {
    throw ConfigError("synthetic: need 1 <= min_instances <= max_instances");
  }
  if (min_instance_length < 1 || max_instance_length < min_instance_length ||
      min_instance_length > min_steps) {
    throw ConfigError("synthetic: instance length range does not fit the videos");
  }
  if (noise < 0 || scene_scale < 0 || fps <= 0 || frames_per_segment < 1) {
    throw ConfigError("synthetic: noise, scene_scale, fps and frames_per_segment out of range");
  }
}

SyntheticDataset GenerateSynthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.Validate();
  std::mt19937_64 rng(seed);
  SyntheticDataset out;
  const std::size_t dim = static_cast<std::size_t>(spec.feature_dim);
  // The last accepted vector is the shared background signature.
  std::vector<Tensor> vectors;
  for (int c = 0; c <= spec.num_classes; ++c) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) {
        throw ConfigError("synthetic: cannot place " + std::to_string(spec.num_classes) +
                          " prototypes at cosine distance >= " +
                          std::to_string(spec.min_prototype_distance));
      }
      Tensor p = Gaussian(dim, rng);
      const bool far = std::all_of(
          vectors.begin(), vectors.end(),
          [&](const Tensor& q) { return Cosine(p, q) >= spec.min_prototype_distance; });
      if (far) {
        vectors.push_back(std::move(p));
        break;
      }
    }
  }
  out.background = vectors.back();
  vectors.pop_back();
  out.prototypes = std::move(vectors);
  std::vector<std::string> names;
  for (int c = 0; c < spec.num_classes; ++c) names.push_back("action_" + std::to_string(c));
  out.train = MakeSplit(spec, out.prototypes, out.background, names, spec.train_videos, "train", rng);
  out.test = MakeSplit(spec, out.prototypes, out.background, names, spec.test_videos, "test", rng);
  return out;
}

void WriteSyntheticDataset(const SyntheticDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "features");
  for (const Dataset* split : {&dataset.train, &dataset.test}) {
    for (const VideoRecord& v : split->videos) WriteFeatures(dir / v.feature_path, v.features);
  }
  SaveManifest(dataset.train, dir / "train.json");
  SaveManifest(dataset.test, dir / "test.json");
}

}  // namespace vqk
