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
#ifndef VQK_GRADCHECK_H_
#define VQK_GRADCHECK_H_

#include <functional>
#include <span>
#include <vector>

#include "vqk/autograd.h"

namespace vqk {

// Builds a scalar on `tape` from parameters already registered on it.
using ScalarFunction = std::function<Var(Tape&, std::span<const Var>)>;

inline constexpr double kFiniteDiffStep = 1e-5;

// Compares reverse-mode gradients of f at `point` against central
// differences. For each parameter tensor the error is
//   |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
// with |.| the Euclidean norm over that tensor's entries; returns the max
// over parameter tensors. Scalar parameters reduce to the entrywise form.
double FiniteDiffCheck(const ScalarFunction& f, std::span<const Tensor> point,
                       double step = kFiniteDiffStep);

// Analytic gradients of f at `point`, one tensor per parameter.
std::vector<Tensor> AnalyticGradients(const ScalarFunction& f,
                                      std::span<const Tensor> point);

// Central-difference gradients of f at `point`. Values passed through
// StopGradient are held at their base-point values during perturbation.
std::vector<Tensor> NumericGradients(const ScalarFunction& f,
                                     std::span<const Tensor> point,
                                     double step = kFiniteDiffStep);

}  // namespace vqk

#endif  // VQK_GRADCHECK_H_
