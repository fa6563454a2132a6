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
#ifndef VQK_FEATURES_H_
#define VQK_FEATURES_H_

// Feature file layout (all integers little-endian):
//
//   offset  size   field
//   0       4      magic "VQKF"
//   4       2      format version (u16, currently 1)
//   6       4      T, number of segments (u32)
//   10      4      D, feature width (u32)
//   14      4*T*D  row-major f32 payload
//
// Values are stored as 32-bit floats and promoted to double on read.

#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include "vqk/tensor.h"

namespace vqk {

inline constexpr char kFeatureMagic[4] = {'V', 'Q', 'K', 'F'};
inline constexpr std::uint16_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 14;

// File missing or unreadable/unwritable.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FeatureFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class FeatureMagicError : public FeatureFormatError {
 public:
  using FeatureFormatError::FeatureFormatError;
};
class FeatureVersionError : public FeatureFormatError {
 public:
  using FeatureFormatError::FeatureFormatError;
};
class FeatureLengthError : public FeatureFormatError {
 public:
  using FeatureFormatError::FeatureFormatError;
};

// Writes a [T x D] matrix. Entries are narrowed to f32.
void WriteFeatures(const std::filesystem::path& path, const Tensor& features);

Tensor ReadFeatures(const std::filesystem::path& path);

// Rounds every entry to the nearest f32, matching a write/read round trip.
Tensor RoundToFloat(Tensor t);

}  // namespace vqk

#endif  // VQK_FEATURES_H_
