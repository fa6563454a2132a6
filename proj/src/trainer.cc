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
#include "vqk/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace vqk {
namespace {

constexpr int kBatchRetries = 1000;

bool AllBatchesOk(const std::vector<std::vector<std::size_t>>& batches,
                  std::span<const LabelVector> labels, int min_pairs) {
  return std::all_of(batches.begin(), batches.end(), [&](const auto& b) {
    return CountSharedPairs(b, labels) >= min_pairs;
  });
}

// Shuffled order cut into batches; the last batch is topped up with random
// videos not already in it.
std::vector<std::vector<std::size_t>> ShuffledBatches(std::size_t n, std::size_t size,
                                                      std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < n; i += size) {
    batches.emplace_back(order.begin() + i, order.begin() + std::min(n, i + size));
  }
  auto& last = batches.back();
  while (last.size() < size) {
    const std::size_t pick = order[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)];
    if (std::find(last.begin(), last.end(), pick) == last.end()) last.push_back(pick);
  }
  return batches;
}

// Pulls videos of one class into a deficient batch, evicting its least
// connected members, as long as each donor batch stays valid (or does not
// lose pairs if it was already short). Classes are tried in order of their
// presence in the batch, then overall frequency.
bool Repair(std::vector<std::vector<std::size_t>>& batches,
            std::span<const LabelVector> labels, int min_pairs) {
  auto contains = [](const std::vector<std::size_t>& b, std::size_t v) {
    return std::find(b.begin(), b.end(), v) != b.end();
  };
  const int classes = labels[0].num_classes();
  std::vector<int> frequency(classes, 0);
  for (const LabelVector& l : labels)
    for (int c : l.classes()) ++frequency[c];

  for (auto& batch : batches) {
    if (CountSharedPairs(batch, labels) >= min_pairs) continue;
    std::vector<int> order(classes);
    std::iota(order.begin(), order.end(), 0);
    auto present = [&](int c) {
      return std::count_if(batch.begin(), batch.end(),
                           [&](std::size_t v) { return labels[v].Contains(c); });
    };
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      const auto px = present(x), py = present(y);
      return px != py ? px > py : frequency[x] > frequency[y];
    });
    for (int c : order) {
      if (frequency[c] < 2) continue;
      while (CountSharedPairs(batch, labels) < min_pairs) {
        // Least connected member without class c.
        std::size_t victim = batch.size();
        int victim_links = 0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
          if (labels[batch[i]].Contains(c)) continue;
          int links = 0;
          for (std::size_t j = 0; j < batch.size(); ++j)
            links += j != i && labels[batch[i]].Overlaps(labels[batch[j]]);
          if (victim == batch.size() || links < victim_links) {
            victim = i;
            victim_links = links;
          }
        }
        if (victim == batch.size()) break;
        bool swapped = false;
        for (auto& donor : batches) {
          if (&donor == &batch) continue;
          const int donor_pairs = CountSharedPairs(donor, labels);
          for (std::size_t j = 0; j < donor.size() && !swapped; ++j) {
            if (!labels[donor[j]].Contains(c) || contains(batch, donor[j]) ||
                contains(donor, batch[victim])) {
              continue;
            }
            std::swap(batch[victim], donor[j]);
            if (CountSharedPairs(donor, labels) >= std::min(min_pairs, donor_pairs)) {
              swapped = true;
            } else {
              std::swap(batch[victim], donor[j]);
            }
          }
          if (swapped) break;
        }
        if (!swapped) break;
      }
      if (CountSharedPairs(batch, labels) >= min_pairs) break;
    }
  }
  return AllBatchesOk(batches, labels, min_pairs);
}

std::string DeficientClasses(std::span<const LabelVector> labels,
                             std::span<const std::string> names) {
  const int classes = labels.empty() ? 0 : labels[0].num_classes();
  std::vector<int> counts(classes, 0);
  for (const LabelVector& l : labels)
    for (int c : l.classes()) ++counts[c];
  std::string out;
  for (int c = 0; c < classes; ++c) {
    if (counts[c] >= 2) continue;
    if (!out.empty()) out += ", ";
    out += (static_cast<std::size_t>(c) < names.size() ? names[c] : "class " + std::to_string(c)) +
           " (" + std::to_string(counts[c]) + " video" + (counts[c] == 1 ? "" : "s") + ")";
  }
  return out.empty() ? "none below 2 videos; label overlap too sparse" : out;
}

const char* FirstNonFinite(const LossBreakdown& b) {
  const std::pair<const char*, double> terms[] = {
      {"video_cls", b.video_cls},         {"query_similarity", b.query_similarity},
      {"mutual_learning", b.mutual_learning}, {"guide", b.guide},
      {"coactivity", b.coactivity},       {"sparsity", b.sparsity},
      {"total", b.total}};
  for (const auto& [name, value] : terms) {
    if (!std::isfinite(value)) return name;
  }
  return nullptr;
}

void Accumulate(LossBreakdown& acc, const LossBreakdown& b, double w) {
  acc.video_cls += w * b.video_cls;
  acc.query_similarity += w * b.query_similarity;
  acc.mutual_learning += w * b.mutual_learning;
  acc.guide += w * b.guide;
  acc.coactivity += w * b.coactivity;
  acc.sparsity += w * b.sparsity;
  acc.weighted_video_cls += w * b.weighted_video_cls;
  acc.weighted_query_similarity += w * b.weighted_query_similarity;
  acc.weighted_mutual_learning += w * b.weighted_mutual_learning;
  acc.weighted_guide += w * b.weighted_guide;
  acc.weighted_coactivity += w * b.weighted_coactivity;
  acc.weighted_sparsity += w * b.weighted_sparsity;
  acc.total += w * b.total;
}

}  // namespace

void TrainConfig::Validate() const {
  if (batch_size < 2) throw ConfigError("train: batch_size must be >= 2");
  if (min_shared_pairs < 0) throw ConfigError("train: min_shared_pairs must be >= 0");
  if (min_shared_pairs > batch_size * (batch_size - 1) / 2) {
    throw ConfigError("train: min_shared_pairs exceeds the pairs in one batch");
  }
  if (t_train < 1) throw ConfigError("train: t_train must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("train: learning_rate must be positive");
  if (weight_decay < 0) throw ConfigError("train: weight_decay must be nonnegative");
  if (epochs < 0) throw ConfigError("train: epochs must be nonnegative");
  loss.Validate();
}

void AdamStep(std::span<Tensor* const> params, std::span<const Tensor> grads,
              OptimizerState& state, const AdamConfig& config) {
  if (params.size() != grads.size()) {
    throw DimensionError("adam: " + std::to_string(params.size()) + " params vs " +
                         std::to_string(grads.size()) + " grads");
  }
  if (state.m.empty()) {
    for (Tensor* p : params) {
      state.m.emplace_back(p->shape());
      state.v.emplace_back(p->shape());
    }
  }
  if (state.m.size() != params.size()) {
    throw DimensionError("adam: optimizer state does not match the parameters");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = grads[k];
    if (g.shape() != p.shape() || state.m[k].shape() != p.shape()) {
      throw DimensionError("adam: shape mismatch at parameter " + std::to_string(k));
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      double grad = g[i];
      if (!config.decoupled) grad += config.weight_decay * p[i];
      double& m = state.m[k][i];
      double& v = state.v[k][i];
      m = config.beta1 * m + (1.0 - config.beta1) * grad;
      v = config.beta2 * v + (1.0 - config.beta2) * grad * grad;
      const double update = (m / c1) / (std::sqrt(v / c2) + config.eps);
      if (config.decoupled) p[i] -= config.learning_rate * config.weight_decay * p[i];
      p[i] -= config.learning_rate * update;
    }
  }
}

Tensor SampleSegments(const Tensor& features, std::size_t t_target, std::mt19937_64& rng) {
  if (features.rank() != 2 || features.dim(0) == 0) {
    throw DimensionError("sample_segments: expected a non-empty [T x D] matrix, got " +
                         ShapeToString(features.shape()));
  }
  const std::size_t steps = features.dim(0), dim = features.dim(1);
  Tensor out({t_target, dim});
  for (std::size_t i = 0; i < t_target; ++i) {
    const std::size_t lo = i * steps / t_target;
    const std::size_t hi = std::max(lo + 1, (i + 1) * steps / t_target);
    const std::size_t src = std::uniform_int_distribution<std::size_t>(lo, hi - 1)(rng);
    std::copy_n(features.data().begin() + src * dim, dim, out.data().begin() + i * dim);
  }
  return out;
}

int CountSharedPairs(std::span<const std::size_t> batch,
                     std::span<const LabelVector> labels) {
  int pairs = 0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    for (std::size_t j = i + 1; j < batch.size(); ++j)
      pairs += labels[batch[i]].Overlaps(labels[batch[j]]);
  return pairs;
}

std::vector<std::vector<std::size_t>> MakeBatches(std::span<const LabelVector> labels,
                                                  int batch_size, int min_shared_pairs,
                                                  std::mt19937_64& rng,
                                                  std::span<const std::string> class_names) {
  if (batch_size < 1) throw ConfigError("make_batches: batch_size must be >= 1");
  const std::size_t size = static_cast<std::size_t>(batch_size);
  if (labels.size() < size) {
    throw ConfigError("make_batches: " + std::to_string(labels.size()) +
                      " videos cannot fill a batch of " + std::to_string(batch_size));
  }
  std::vector<std::vector<std::size_t>> batches;
  for (int attempt = 0; attempt < kBatchRetries; ++attempt) {
    batches = ShuffledBatches(labels.size(), size, rng);
    if (AllBatchesOk(batches, labels, min_shared_pairs)) return batches;
  }
  if (Repair(batches, labels, min_shared_pairs)) return batches;
  throw ConfigError("make_batches: cannot find " + std::to_string(min_shared_pairs) +
                    " class-sharing pairs in every batch of " + std::to_string(batch_size) +
                    " after " + std::to_string(kBatchRetries) +
                    " retries and repair; deficient classes: " +
                    DeficientClasses(labels, class_names));
}

JointLoss BatchLoss(Tape& tape, const ModelVars& vars, std::span<const Tensor> features,
                    std::span<const LabelVector> labels, const ModelConfig& model,
                    const TrainConfig& train) {
  std::vector<ModelOutputs> outputs;
  outputs.reserve(features.size());
  for (const Tensor& x : features) {
    outputs.push_back(Forward(tape.Constant(x), vars, model, train.mode));
  }
  return ComputeJointLoss(outputs, labels, train.loss,
                          train.mode == QueryMode::kVideoSpecific);
}

LossBreakdown TrainStep(ModelParams& params, OptimizerState& state,
                        std::span<const Tensor> features,
                        std::span<const LabelVector> labels, const ModelConfig& model,
                        const TrainConfig& train) {
  Tape tape;
  const ModelVars vars = BindParams(tape, params, true);
  const JointLoss loss = BatchLoss(tape, vars, features, labels, model, train);
  if (const char* bad = FirstNonFinite(loss.breakdown)) {
    throw NonFiniteLossError(std::string("non-finite loss term '") + bad + "' (total " +
                             std::to_string(loss.breakdown.total) + ")");
  }
  tape.Backward(loss.total);

  std::vector<Tensor*> tensors;
  ForEachParam([&](const std::string&, Tensor& t) { tensors.push_back(&t); }, params);
  std::vector<Tensor> grads;
  ForEachParam([&](const std::string&, const Var& v) { grads.push_back(tape.grad(v)); },
               vars);
  AdamStep(tensors, grads, state,
           {train.learning_rate, train.weight_decay, train.decoupled_weight_decay});
  return loss.breakdown;
}

TrainResult Train(const Dataset& dataset, const ModelConfig& model,
                  const TrainConfig& train, const EpochCallback& on_epoch) {
  model.Validate();
  train.Validate();
  for (const VideoRecord& v : dataset.videos) {
    if (v.features.rank() != 2 || v.features.dim(1) != static_cast<std::size_t>(model.feature_dim)) {
      throw DimensionError("train: video '" + v.id + "' features " +
                           ShapeToString(v.features.shape()) + " do not match feature_dim " +
                           std::to_string(model.feature_dim));
    }
    if (v.label.empty()) {
      throw ArgumentError("train: video '" + v.id + "' has no foreground label");
    }
  }

  TrainResult result;
  result.params = InitParams(model, train.seed);
  std::mt19937_64 rng(train.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<LabelVector> labels;
  for (const VideoRecord& v : dataset.videos) labels.push_back(v.label);

  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    const auto batches = MakeBatches(labels, train.batch_size, train.min_shared_pairs,
                                     rng, dataset.classes);
    EpochLog log;
    log.epoch = epoch + 1;
    log.batches = static_cast<int>(batches.size());
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::vector<Tensor> features;
      std::vector<LabelVector> batch_labels;
      for (std::size_t idx : batches[b]) {
        features.push_back(SampleSegments(dataset.videos[idx].features,
                                          static_cast<std::size_t>(train.t_train), rng));
        batch_labels.push_back(labels[idx]);
      }
      try {
        const LossBreakdown step = TrainStep(result.params, result.optimizer, features,
                                             batch_labels, model, train);
        Accumulate(log.mean, step, 1.0 / static_cast<double>(batches.size()));
      } catch (const NonFiniteLossError& e) {
        throw NonFiniteLossError(std::string(e.what()) + " at epoch " +
                                 std::to_string(epoch + 1) + ", batch " +
                                 std::to_string(b + 1));
      }
    }
    if (on_epoch) on_epoch(result.params, log);
    result.log.push_back(log);
  }
  return result;
}

}  // namespace vqk
