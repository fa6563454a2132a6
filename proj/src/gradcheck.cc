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
#include "vqk/gradcheck.h"

#include <algorithm>
#include <cmath>

namespace vqk {
namespace {

double Evaluate(const ScalarFunction& f, std::span<const Tensor> point,
                const std::vector<Tensor>* detached) {
  Tape tape;
  tape.ReplayDetachedFrom(detached);
  std::vector<Var> params;
  params.reserve(point.size());
  for (const Tensor& p : point) params.push_back(tape.Constant(p));
  return f(tape, params).value().item();
}

}  // namespace

std::vector<Tensor> AnalyticGradients(const ScalarFunction& f,
                                      std::span<const Tensor> point) {
  Tape tape;
  std::vector<Var> params;
  params.reserve(point.size());
  for (const Tensor& p : point) params.push_back(tape.Parameter(p));
  tape.Backward(f(tape, params));
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (const Var& p : params) grads.push_back(tape.grad(p));
  return grads;
}

std::vector<Tensor> NumericGradients(const ScalarFunction& f,
                                     std::span<const Tensor> point,
                                     double step) {
  // Detached values are frozen at the base point, matching what the
  // reverse pass treats as constant.
  std::vector<Tensor> detached;
  {
    Tape tape;
    tape.RecordDetachedInto(&detached);
    std::vector<Var> params;
    for (const Tensor& p : point) params.push_back(tape.Constant(p));
    f(tape, params);
  }
  std::vector<Tensor> perturbed(point.begin(), point.end());
  std::vector<Tensor> grads;
  grads.reserve(point.size());
  for (std::size_t p = 0; p < perturbed.size(); ++p) {
    Tensor g(perturbed[p].shape());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double original = perturbed[p][i];
      perturbed[p][i] = original + step;
      const double up = Evaluate(f, perturbed, &detached);
      perturbed[p][i] = original - step;
      const double down = Evaluate(f, perturbed, &detached);
      perturbed[p][i] = original;
      g[i] = (up - down) / (2.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double FiniteDiffCheck(const ScalarFunction& f, std::span<const Tensor> point,
                       double step) {
  const std::vector<Tensor> analytic = AnalyticGradients(f, point);
  const std::vector<Tensor> numeric = NumericGradients(f, point, step);
  double worst = 0.0;
  for (std::size_t p = 0; p < analytic.size(); ++p) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < analytic[p].size(); ++i) {
      const double d = analytic[p][i] - numeric[p][i];
      diff += d * d;
      na += analytic[p][i] * analytic[p][i];
      nn += numeric[p][i] * numeric[p][i];
    }
    const double denom = std::max(1e-8, std::sqrt(na) + std::sqrt(nn));
    worst = std::max(worst, std::sqrt(diff) / denom);
  }
  return worst;
}

}  // namespace vqk
