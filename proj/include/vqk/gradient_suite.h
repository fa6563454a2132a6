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
#ifndef VQK_GRADIENT_SUITE_H_
#define VQK_GRADIENT_SUITE_H_

#include <cstdint>
#include <string>
#include <vector>

namespace vqk {

inline constexpr double kGradCheckTolerance = 1e-4;

struct GradCheckResult {
  std::string name;
  double max_error = 0.0;  // worst case over seeds
  int seeds = 0;
};

// Finite-difference check of every differentiable op, every loss term and
// the full joint loss through a tiny model (T <= 8, D <= 12, C <= 3).
std::vector<GradCheckResult> RunGradientSuite(int seeds = 20,
                                              std::uint64_t base_seed = 0);

}  // namespace vqk

#endif  // VQK_GRADIENT_SUITE_H_
