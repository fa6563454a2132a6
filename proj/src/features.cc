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
#include "vqk/features.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace vqk {
namespace {

static_assert(std::endian::native == std::endian::little,
              "feature files assume a little-endian host");

template <typename T>
void Put(std::vector<char>& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T Get(const std::vector<char>& in, std::size_t offset) {
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

}  // namespace

void WriteFeatures(const std::filesystem::path& path, const Tensor& features) {
  if (features.rank() != 2) {
    throw DimensionError("write_features: expected a [T x D] matrix, got " +
                         ShapeToString(features.shape()));
  }
  std::vector<char> out(kFeatureMagic, kFeatureMagic + 4);
  Put<std::uint16_t>(out, kFeatureVersion);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(features.dim(0)));
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(features.dim(1)));
  out.reserve(out.size() + 4 * features.size());
  for (double v : features.data()) Put<float>(out, static_cast<float>(v));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write feature file " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("short write to feature file " + path.string());
}

Tensor ReadFeatures(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open feature file " + path.string());
  const std::vector<char> in((std::istreambuf_iterator<char>(file)),
                             std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();
  if (in.size() < 4 || std::memcmp(in.data(), kFeatureMagic, 4) != 0) {
    throw FeatureMagicError("bad feature file magic" + where);
  }
  if (in.size() < kFeatureHeaderBytes) {
    throw FeatureLengthError("truncated feature header" + where + ": expected " +
                             std::to_string(kFeatureHeaderBytes) +
                             " bytes, got " + std::to_string(in.size()));
  }
  const auto version = Get<std::uint16_t>(in, 4);
  if (version != kFeatureVersion) {
    throw FeatureVersionError("unsupported feature file version " +
                              std::to_string(version) + where + " (expected " +
                              std::to_string(kFeatureVersion) + ")");
  }
  const std::size_t steps = Get<std::uint32_t>(in, 6);
  const std::size_t dim = Get<std::uint32_t>(in, 10);
  const std::size_t expected = kFeatureHeaderBytes + 4 * steps * dim;
  if (in.size() != expected) {
    throw FeatureLengthError("feature payload length mismatch" + where +
                             ": expected " + std::to_string(expected) +
                             " bytes, got " + std::to_string(in.size()));
  }
  std::vector<double> values(steps * dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = Get<float>(in, kFeatureHeaderBytes + 4 * i);
  }
  return Tensor({steps, dim}, std::move(values));
}

Tensor RoundToFloat(Tensor t) {
  for (double& v : t.data()) v = static_cast<float>(v);
  return t;
}

}  // namespace vqk
