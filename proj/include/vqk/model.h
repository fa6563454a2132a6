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
#ifndef VQK_MODEL_H_
#define VQK_MODEL_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "vqk/autograd.h"
#include "vqk/tensor.h"

namespace vqk {

struct ModelConfig {
  int num_classes = 20;      // C foreground classes; the background is C+1.
  int feature_dim = 2048;    // D, RGB half then flow half.
  int hidden_dim = 512;      // Foreground stream width.
  int kernel_size = 3;
  double leaky_slope = 0.2;
  double layer_norm_eps = 1e-5;
  double query_init_std = 0.02;

  int num_queries() const { return num_classes + 1; }
  int background_index() const { return num_classes; }
  // Throws ConfigError on an odd D, C < 1, or an even kernel.
  void Validate() const;
};

enum class QueryMode { kVideoSpecific, kUniform };

std::string_view QueryModeName(QueryMode mode);
QueryMode ParseQueryMode(std::string_view name);

// Parameter containers are templated on the leaf type so the same layout
// holds plain tensors (ModelParams) and tape handles (ModelVars).
template <typename T>
struct ConvLayerT {
  T weight;  // [Cout x Cin x k]
  T bias;    // [Cout]
};

template <typename T>
struct AttentionBlockT {
  T w_q, w_k, w_v, w_o;  // [D x D]
  T norm_gain, norm_bias;  // [D]
};

template <typename T>
struct ModelParamsT {
  std::array<ConvLayerT<T>, 3> rgb_stream;
  std::array<ConvLayerT<T>, 3> flow_stream;
  std::array<ConvLayerT<T>, 2> fusion;
  ConvLayerT<T> key;
  T query_init;  // [(C+1) x D]
  AttentionBlockT<T> self_attention;
  AttentionBlockT<T> cross_attention;
};

using ConvLayer = ConvLayerT<Tensor>;
using AttentionBlockParams = AttentionBlockT<Tensor>;
using ModelParams = ModelParamsT<Tensor>;
using ModelVars = ModelParamsT<Var>;

// Calls fn(name, a_leaf, b_leaf...) for every parameter in a fixed order,
// visiting the same slot across all given containers.
template <typename Fn, typename... P>
void ForEachParam(Fn&& fn, P&... params) {
  auto conv = [&](const std::string& prefix, auto&... layer) {
    fn(prefix + ".weight", layer.weight...);
    fn(prefix + ".bias", layer.bias...);
  };
  auto block = [&](const std::string& prefix, auto&... b) {
    fn(prefix + ".w_q", b.w_q...);
    fn(prefix + ".w_k", b.w_k...);
    fn(prefix + ".w_v", b.w_v...);
    fn(prefix + ".w_o", b.w_o...);
    fn(prefix + ".norm_gain", b.norm_gain...);
    fn(prefix + ".norm_bias", b.norm_bias...);
  };
  for (std::size_t i = 0; i < 3; ++i) {
    conv("rgb_stream." + std::to_string(i), params.rgb_stream[i]...);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    conv("flow_stream." + std::to_string(i), params.flow_stream[i]...);
  }
  for (std::size_t i = 0; i < 2; ++i) {
    conv("fusion." + std::to_string(i), params.fusion[i]...);
  }
  conv("key", params.key...);
  fn(std::string("query_init"), params.query_init...);
  block("self_attention", params.self_attention...);
  block("cross_attention", params.cross_attention...);
}

// Seeded initialization: uniform(+-1/sqrt(fan_in)) weights, zero biases,
// unit layer-norm gains, normal(0, query_init_std) initial queries.
ModelParams InitParams(const ModelConfig& config, std::uint64_t seed);

// Registers every parameter on the tape; trainable leaves when
// `trainable`, constants otherwise.
ModelVars BindParams(Tape& tape, const ModelParams& params, bool trainable);

std::size_t CountParameters(const ModelParams& params);

struct ModelOutputs {
  Var s_rgb;          // [T]
  Var s_flow;         // [T]
  Var s;              // [T], mean of the two streams
  Var fused;          // X-hat, [T x D]
  Var queries;        // Q-hat, [(C+1) x D]
  Var key;            // K-hat, [T x D]
  Var cam;            // A, [(C+1) x T]
  Var suppressed_cam; // A-hat, [(C+1) x T]
};

// conv -> LeakyReLU -> conv -> LeakyReLU -> conv -> sigmoid; returns [T].
Var ForegroundStream(Var x_half, const std::array<ConvLayerT<Var>, 3>& stack,
                     double leaky_slope);

// conv -> LeakyReLU -> conv over the concatenated [RGB | flow] features.
Var FuseFeatures(Var x, const std::array<ConvLayerT<Var>, 2>& fusion,
                 double leaky_slope);

// Single-head attention softmax((q Wq)(k Wk)^T / sqrt(D)) (v Wv) Wo,
// followed by a residual from q and layer normalization.
Var AttentionBlock(Var q, Var k, Var v, const AttentionBlockT<Var>& params,
                   double eps);

// Self-attention over the initial queries, then cross-attention onto the
// fused video features.
Var LearnQueries(Var query_init, Var fused, const ModelVars& params,
                 double eps);

// A = Q K^T / sqrt(D).
Var QueryKeyAttention(Var queries, Var key);

// A-hat[c, t] = s[t] * A[c, t].
Var SuppressBackground(Var cam, Var s);

// Full pipeline for one video. `features` is [T x D] with the RGB half
// first. In uniform mode the query learner is bypassed and Q-hat = Q_init.
ModelOutputs Forward(Var features, const ModelVars& params,
                     const ModelConfig& config, QueryMode mode);

}  // namespace vqk

#endif  // VQK_MODEL_H_
