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
#ifndef VQK_TRAINER_H_
#define VQK_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqk/dataset.h"
#include "vqk/losses.h"
#include "vqk/model.h"

namespace vqk {

class NonFiniteLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  int batch_size = 10;
  int min_shared_pairs = 3;
  int t_train = 500;
  double learning_rate = 5e-5;
  double weight_decay = 1e-3;
  // AdamW-style decay applied to the parameters instead of the gradient.
  bool decoupled_weight_decay = false;
  int epochs = 100;
  std::uint64_t seed = 0;
  LossWeights loss;
  QueryMode mode = QueryMode::kVideoSpecific;

  void Validate() const;
};

// Adam moments in ForEachParam order. Empty moments mean no step taken yet.
struct OptimizerState {
  std::int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

struct AdamConfig {
  double learning_rate = 5e-5;
  double weight_decay = 0.0;
  bool decoupled = false;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update. Coupled weight decay adds wd * theta to
// the gradient; decoupled decay subtracts lr * wd * theta after the update.
void AdamStep(std::span<Tensor* const> params, std::span<const Tensor> grads,
              OptimizerState& state, const AdamConfig& config);

// Stratified resampling of a [T_video x D] matrix to [t_target x D]: bin i
// covers [floor(i T / t), max(lo + 1, floor((i + 1) T / t))) and contributes
// one uniform index. Temporal order is preserved.
Tensor SampleSegments(const Tensor& features, std::size_t t_target, std::mt19937_64& rng);

// Number of unordered pairs in `batch` sharing a foreground class.
int CountSharedPairs(std::span<const std::size_t> batch,
                     std::span<const LabelVector> labels);

// One epoch of batches. Each batch has exactly batch_size distinct videos
// and at least min_shared_pairs sharing pairs; every video appears at least
// once. Shuffles with up to 1000 retries, then repairs deficient batches by
// swapping. Throws ConfigError naming classes with too few videos when the
// constraint cannot be met.
std::vector<std::vector<std::size_t>> MakeBatches(
    std::span<const LabelVector> labels, int batch_size, int min_shared_pairs,
    std::mt19937_64& rng, std::span<const std::string> class_names = {});

// Loss of `params` on one batch of (already sampled) feature matrices.
JointLoss BatchLoss(Tape& tape, const ModelVars& vars, std::span<const Tensor> features,
                    std::span<const LabelVector> labels, const ModelConfig& model,
                    const TrainConfig& train);

// Forward, backward and one Adam step. Returns the pre-step loss terms.
// Throws NonFiniteLossError naming the first non-finite term.
LossBreakdown TrainStep(ModelParams& params, OptimizerState& state,
                        std::span<const Tensor> features,
                        std::span<const LabelVector> labels, const ModelConfig& model,
                        const TrainConfig& train);

struct EpochLog {
  int epoch = 0;  // 1-based
  int batches = 0;
  LossBreakdown mean;  // averaged over the epoch's batches
  std::optional<double> validation_map;
};

struct TrainResult {
  ModelParams params;
  OptimizerState optimizer;
  std::vector<EpochLog> log;
};

// Called after every epoch; may fill log.validation_map.
using EpochCallback = std::function<void(const ModelParams&, EpochLog&)>;

// Seeded training loop. Parameters are initialized from train.seed.
TrainResult Train(const Dataset& dataset, const ModelConfig& model,
                  const TrainConfig& train, const EpochCallback& on_epoch = {});

}  // namespace vqk

#endif  // VQK_TRAINER_H_
