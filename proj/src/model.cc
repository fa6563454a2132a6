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
#include "vqk/model.h"

#include <cmath>
#include <random>

#include "vqk/ops.h"

namespace vqk {
namespace {

using Rng = std::mt19937_64;

ConvLayer MakeConv(std::size_t cin, std::size_t cout, std::size_t kernel,
                   Rng& rng) {
  ConvLayer layer{Tensor({cout, cin, kernel}), Tensor({cout})};
  const double bound = 1.0 / std::sqrt(static_cast<double>(cin * kernel));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& w : layer.weight.data()) w = dist(rng);
  return layer;
}

Tensor MakeProjection(std::size_t dim, Rng& rng) {
  Tensor w({dim, dim});
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& x : w.data()) x = dist(rng);
  return w;
}

AttentionBlockParams MakeBlock(std::size_t dim, Rng& rng) {
  AttentionBlockParams b;
  b.w_q = MakeProjection(dim, rng);
  b.w_k = MakeProjection(dim, rng);
  b.w_v = MakeProjection(dim, rng);
  b.w_o = MakeProjection(dim, rng);
  b.norm_gain = Tensor::Filled({dim}, 1.0);
  b.norm_bias = Tensor({dim});
  return b;
}

void RequireWidth(const Var& v, std::size_t width, const char* what) {
  if (v.value().rank() != 2 || v.shape()[1] != width) {
    throw DimensionError(std::string(what) + ": expected width " +
                         std::to_string(width) + ", got " +
                         ShapeToString(v.shape()));
  }
}

}  // namespace

void ModelConfig::Validate() const {
  if (num_classes < 1) throw ConfigError("model: num_classes must be >= 1");
  if (feature_dim < 2 || feature_dim % 2 != 0) {
    throw ConfigError("model: feature_dim must be a positive even number, got " +
                      std::to_string(feature_dim));
  }
  if (hidden_dim < 1) throw ConfigError("model: hidden_dim must be >= 1");
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw ConfigError("model: kernel_size must be odd, got " +
                      std::to_string(kernel_size));
  }
  if (layer_norm_eps <= 0) throw ConfigError("model: layer_norm_eps must be > 0");
}

std::string_view QueryModeName(QueryMode mode) {
  return mode == QueryMode::kUniform ? "uniform" : "video_specific";
}

QueryMode ParseQueryMode(std::string_view name) {
  if (name == "video_specific") return QueryMode::kVideoSpecific;
  if (name == "uniform") return QueryMode::kUniform;
  throw ConfigError("unknown query mode '" + std::string(name) +
                    "' (expected video_specific or uniform)");
}

ModelParams InitParams(const ModelConfig& config, std::uint64_t seed) {
  config.Validate();
  Rng rng(seed);
  const auto d = static_cast<std::size_t>(config.feature_dim);
  const auto h = static_cast<std::size_t>(config.hidden_dim);
  const auto k = static_cast<std::size_t>(config.kernel_size);
  ModelParams p;
  for (auto* stack : {&p.rgb_stream, &p.flow_stream}) {
    (*stack)[0] = MakeConv(d / 2, h, k, rng);
    (*stack)[1] = MakeConv(h, h, k, rng);
    (*stack)[2] = MakeConv(h, 1, k, rng);
  }
  p.fusion[0] = MakeConv(d, d, k, rng);
  p.fusion[1] = MakeConv(d, d, k, rng);
  p.key = MakeConv(d, d, k, rng);
  p.query_init = Tensor({static_cast<std::size_t>(config.num_queries()), d});
  std::normal_distribution<double> normal(0.0, config.query_init_std);
  for (double& x : p.query_init.data()) x = normal(rng);
  p.self_attention = MakeBlock(d, rng);
  p.cross_attention = MakeBlock(d, rng);
  return p;
}

ModelVars BindParams(Tape& tape, const ModelParams& params, bool trainable) {
  ModelVars vars;
  ForEachParam(
      [&](const std::string&, const Tensor& t, Var& v) {
        v = trainable ? tape.Parameter(t) : tape.Constant(t);
      },
      params, vars);
  return vars;
}

std::size_t CountParameters(const ModelParams& params) {
  std::size_t n = 0;
  ForEachParam([&](const std::string&, const Tensor& t) { n += t.size(); },
               params);
  return n;
}

Var ForegroundStream(Var x_half, const std::array<ConvLayerT<Var>, 3>& stack,
                     double leaky_slope) {
  RequireWidth(x_half, stack[0].weight.shape()[1], "foreground_stream");
  Var h = LeakyRelu(Conv1dTemporal(x_half, stack[0].weight, stack[0].bias),
                    leaky_slope);
  h = LeakyRelu(Conv1dTemporal(h, stack[1].weight, stack[1].bias), leaky_slope);
  h = Sigmoid(Conv1dTemporal(h, stack[2].weight, stack[2].bias));
  return Reshape(h, {h.shape()[0]});
}

Var FuseFeatures(Var x, const std::array<ConvLayerT<Var>, 2>& fusion,
                 double leaky_slope) {
  RequireWidth(x, fusion[0].weight.shape()[1], "fuse_features");
  Var h = LeakyRelu(Conv1dTemporal(x, fusion[0].weight, fusion[0].bias),
                    leaky_slope);
  return Conv1dTemporal(h, fusion[1].weight, fusion[1].bias);
}

Var AttentionBlock(Var q, Var k, Var v, const AttentionBlockT<Var>& params,
                   double eps) {
  const std::size_t d = params.w_q.shape()[0];
  RequireWidth(q, d, "attention_block query");
  RequireWidth(k, d, "attention_block key");
  RequireWidth(v, d, "attention_block value");
  if (k.shape()[0] != v.shape()[0]) {
    throw DimensionError("attention_block: key " + ShapeToString(k.shape()) +
                         " and value " + ShapeToString(v.shape()) +
                         " lengths differ");
  }
  Var qp = MatMul(q, params.w_q);
  Var kp = MatMul(k, params.w_k);
  Var vp = MatMul(v, params.w_v);
  Var scores = Scale(MatMul(qp, Transpose(kp)),
                     1.0 / std::sqrt(static_cast<double>(d)));
  Var heads = MatMul(SoftmaxRows(scores), vp);
  Var out = MatMul(heads, params.w_o);
  return LayerNorm(Add(q, out), params.norm_gain, params.norm_bias, eps);
}

Var LearnQueries(Var query_init, Var fused, const ModelVars& params,
                 double eps) {
  Var q1 = AttentionBlock(query_init, query_init, query_init,
                          params.self_attention, eps);
  return AttentionBlock(q1, fused, fused, params.cross_attention, eps);
}

Var QueryKeyAttention(Var queries, Var key) {
  if (queries.value().rank() != 2 || key.value().rank() != 2 ||
      queries.shape()[1] != key.shape()[1]) {
    throw DimensionError("qk_attention: queries " +
                         ShapeToString(queries.shape()) + " vs key " +
                         ShapeToString(key.shape()));
  }
  const double d = static_cast<double>(queries.shape()[1]);
  return Scale(MatMul(queries, Transpose(key)), 1.0 / std::sqrt(d));
}

Var SuppressBackground(Var cam, Var s) { return ScaleColumns(cam, s); }

ModelOutputs Forward(Var features, const ModelVars& params,
                     const ModelConfig& config, QueryMode mode) {
  const auto d = static_cast<std::size_t>(config.feature_dim);
  if (features.value().rank() != 2 || features.shape()[1] != d ||
      features.shape()[0] == 0) {
    throw DimensionError("forward: features " +
                         ShapeToString(features.shape()) +
                         " do not match feature_dim " + std::to_string(d));
  }
  ModelOutputs out;
  out.s_rgb = ForegroundStream(SliceColumns(features, 0, d / 2),
                               params.rgb_stream, config.leaky_slope);
  out.s_flow = ForegroundStream(SliceColumns(features, d / 2, d),
                                params.flow_stream, config.leaky_slope);
  out.s = Scale(Add(out.s_rgb, out.s_flow), 0.5);
  out.fused = FuseFeatures(features, params.fusion, config.leaky_slope);
  out.queries = mode == QueryMode::kUniform
                    ? params.query_init
                    : LearnQueries(params.query_init, out.fused, params,
                                   config.layer_norm_eps);
  out.key = Conv1dTemporal(out.fused, params.key.weight, params.key.bias);
  out.cam = QueryKeyAttention(out.queries, out.key);
  out.suppressed_cam = SuppressBackground(out.cam, out.s);
  return out;
}

}  // namespace vqk
