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
#include "vqk/ops.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace vqk {
namespace {

void RequireRank(const Var& v, std::size_t rank, const char* op) {
  if (v.value().rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got shape " +
                         ShapeToString(v.shape()));
  }
}

void RequireSameShape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
}

// Rows and columns of a rank-1 or rank-2 tensor; a vector is one row.
std::pair<std::size_t, std::size_t> RowsCols(const Tensor& t, const char* op) {
  if (t.rank() == 1) return {1, t.dim(0)};
  if (t.rank() == 2) return {t.dim(0), t.dim(1)};
  throw DimensionError(std::string(op) + ": expected a vector or matrix, got " +
                       ShapeToString(t.shape()));
}

Tensor ScalarValue(double v) {
  Tensor t(Shape{});
  t[0] = v;
  return t;
}

// Elementwise unary op: value f(x), derivative df(x, y).
template <typename F, typename DF>
Var Unary(Var x, F f, DF df) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return x.tape().Record(std::move(out), {x}, [df](const BackwardContext& c) {
    if (!c.in_grads[0]) return;
    const Tensor& in = *c.inputs[0];
    Tensor& g = *c.in_grads[0];
    for (std::size_t i = 0; i < in.size(); ++i) {
      g[i] += c.out_grad[i] * df(in[i], c.out_value[i]);
    }
  });
}

}  // namespace

Var MatMul(Var a, Var b) {
  RequireRank(a, 2, "matmul");
  RequireRank(b, 2, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions differ, " +
                         ShapeToString(a.shape()) + " . " +
                         ShapeToString(b.shape()));
  }
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = &bv[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return a.tape().Record(
      std::move(out), {a, b}, [m, k, n](const BackwardContext& c) {
        const Tensor& av = *c.inputs[0];
        const Tensor& bv = *c.inputs[1];
        const Tensor& g = c.out_grad;
        if (Tensor* ga = c.in_grads[0]) {
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              for (std::size_t j = 0; j < n; ++j) {
                acc += g[i * n + j] * bv[p * n + j];
              }
              (*ga)[i * k + p] += acc;
            }
          }
        }
        if (Tensor* gb = c.in_grads[1]) {
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = av[i * k + p];
              for (std::size_t j = 0; j < n; ++j) {
                (*gb)[p * n + j] += aip * g[i * n + j];
              }
            }
          }
        }
      });
}

Var Transpose(Var a) {
  RequireRank(a, 2, "transpose");
  const std::size_t r = a.shape()[0], cols = a.shape()[1];
  const Tensor& av = a.value();
  Tensor out({cols, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[j * r + i] = av[i * cols + j];
  }
  return a.tape().Record(std::move(out), {a},
                         [r, cols](const BackwardContext& c) {
                           Tensor* g = c.in_grads[0];
                           if (!g) return;
                           for (std::size_t i = 0; i < r; ++i) {
                             for (std::size_t j = 0; j < cols; ++j) {
                               (*g)[i * cols + j] += c.out_grad[j * r + i];
                             }
                           }
                         });
}

Var Add(Var a, Var b) {
  RequireSameShape(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return a.tape().Record(std::move(out), {a, b}, [](const BackwardContext& c) {
    for (Tensor* g : c.in_grads) {
      if (!g) continue;
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += c.out_grad[i];
    }
  });
}

Var Sub(Var a, Var b) {
  RequireSameShape(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return a.tape().Record(std::move(out), {a, b}, [](const BackwardContext& c) {
    if (Tensor* g = c.in_grads[0]) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += c.out_grad[i];
    }
    if (Tensor* g = c.in_grads[1]) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= c.out_grad[i];
    }
  });
}

Var Mul(Var a, Var b) {
  RequireSameShape(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.tape().Record(std::move(out), {a, b}, [](const BackwardContext& c) {
    const Tensor& av = *c.inputs[0];
    const Tensor& bv = *c.inputs[1];
    if (Tensor* g = c.in_grads[0]) {
      for (std::size_t i = 0; i < g->size(); ++i) {
        (*g)[i] += c.out_grad[i] * bv[i];
      }
    }
    if (Tensor* g = c.in_grads[1]) {
      for (std::size_t i = 0; i < g->size(); ++i) {
        (*g)[i] += c.out_grad[i] * av[i];
      }
    }
  });
}

Var Scale(Var a, double factor) {
  return Unary(
      a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Var AddScalar(Var a, double offset) {
  return Unary(
      a, [offset](double x) { return x + offset; },
      [](double, double) { return 1.0; });
}

Var DivByScalar(Var a, Var s) {
  if (s.value().size() != 1) {
    throw DimensionError("div_by_scalar: divisor has shape " +
                         ShapeToString(s.shape()));
  }
  const double d = s.value()[0];
  Tensor out = a.value();
  for (double& x : out.data()) x /= d;
  return a.tape().Record(std::move(out), {a, s}, [](const BackwardContext& c) {
    const double d = (*c.inputs[1])[0];
    if (Tensor* g = c.in_grads[0]) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += c.out_grad[i] / d;
    }
    if (Tensor* g = c.in_grads[1]) {
      double acc = 0.0;
      for (std::size_t i = 0; i < c.out_value.size(); ++i) {
        acc += c.out_grad[i] * c.out_value[i];
      }
      (*g)[0] -= acc / d;
    }
  });
}

Var AddRowBias(Var m, Var bias) {
  RequireRank(m, 2, "add_row_bias");
  RequireRank(bias, 1, "add_row_bias");
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  if (bias.shape()[0] != cols) {
    throw DimensionError("add_row_bias: " + ShapeToString(m.shape()) +
                         " with bias " + ShapeToString(bias.shape()));
  }
  Tensor out = m.value();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] += bias.value()[j];
  }
  return m.tape().Record(
      std::move(out), {m, bias}, [rows, cols](const BackwardContext& c) {
        if (Tensor* g = c.in_grads[0]) {
          for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += c.out_grad[i];
        }
        if (Tensor* g = c.in_grads[1]) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < cols; ++j) {
              (*g)[j] += c.out_grad[r * cols + j];
            }
          }
        }
      });
}

Var ScaleColumns(Var m, Var s) {
  RequireRank(m, 2, "scale_columns");
  RequireRank(s, 1, "scale_columns");
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  if (s.shape()[0] != cols) {
    throw DimensionError("scale_columns: " + ShapeToString(m.shape()) +
                         " with scale " + ShapeToString(s.shape()));
  }
  Tensor out = m.value();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] *= s.value()[j];
  }
  return m.tape().Record(
      std::move(out), {m, s}, [rows, cols](const BackwardContext& c) {
        const Tensor& mv = *c.inputs[0];
        const Tensor& sv = *c.inputs[1];
        if (Tensor* g = c.in_grads[0]) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < cols; ++j) {
              (*g)[r * cols + j] += c.out_grad[r * cols + j] * sv[j];
            }
          }
        }
        if (Tensor* g = c.in_grads[1]) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < cols; ++j) {
              (*g)[j] += c.out_grad[r * cols + j] * mv[r * cols + j];
            }
          }
        }
      });
}

Var SoftmaxRows(Var m) {
  const auto [rows, cols] = RowsCols(m.value(), "softmax_rows");
  Tensor out = m.value();
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = &out[r * cols];
    const double mx = *std::max_element(row, row + cols);
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      total += row[j];
    }
    for (std::size_t j = 0; j < cols; ++j) row[j] /= total;
  }
  return m.tape().Record(
      std::move(out), {m}, [rows, cols](const BackwardContext& c) {
        Tensor* g = c.in_grads[0];
        if (!g) return;
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t base = r * cols;
          double dot = 0.0;
          for (std::size_t j = 0; j < cols; ++j) {
            dot += c.out_grad[base + j] * c.out_value[base + j];
          }
          for (std::size_t j = 0; j < cols; ++j) {
            (*g)[base + j] += c.out_value[base + j] * (c.out_grad[base + j] - dot);
          }
        }
      });
}

Var LogSoftmaxRows(Var m) {
  const auto [rows, cols] = RowsCols(m.value(), "log_softmax_rows");
  Tensor out = m.value();
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = &out[r * cols];
    const double mx = *std::max_element(row, row + cols);
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) total += std::exp(row[j] - mx);
    const double lse = mx + std::log(total);
    for (std::size_t j = 0; j < cols; ++j) row[j] -= lse;
  }
  return m.tape().Record(
      std::move(out), {m}, [rows, cols](const BackwardContext& c) {
        Tensor* g = c.in_grads[0];
        if (!g) return;
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t base = r * cols;
          double total = 0.0;
          for (std::size_t j = 0; j < cols; ++j) total += c.out_grad[base + j];
          for (std::size_t j = 0; j < cols; ++j) {
            (*g)[base + j] +=
                c.out_grad[base + j] - std::exp(c.out_value[base + j]) * total;
          }
        }
      });
}

Var LayerNorm(Var v, Var gain, Var bias, double eps) {
  const auto [rows, width] = RowsCols(v.value(), "layer_norm");
  const Shape expected{width};
  if (gain.shape() != expected || bias.shape() != expected) {
    throw DimensionError("layer_norm: input " + ShapeToString(v.shape()) +
                         " with gain " + ShapeToString(gain.shape()) +
                         " and bias " + ShapeToString(bias.shape()));
  }
  // Normalized values and inverse std per row, kept for the backward pass.
  Tensor normalized(v.shape());
  std::vector<double> inv_std(rows);
  Tensor out(v.shape());
  const Tensor& x = v.value();
  const double n = static_cast<double>(width);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * width;
    double mu = 0.0;
    for (std::size_t j = 0; j < width; ++j) mu += x[base + j];
    mu /= n;
    double var = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double d = x[base + j] - mu;
      var += d * d;
    }
    var /= n;
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < width; ++j) {
      normalized[base + j] = (x[base + j] - mu) * inv_std[r];
      out[base + j] = gain.value()[j] * normalized[base + j] + bias.value()[j];
    }
  }
  return v.tape().Record(
      std::move(out), {v, gain, bias},
      [rows, width, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](const BackwardContext& c) {
        const Tensor& gv = *c.inputs[1];
        const Tensor& g = c.out_grad;
        const double n = static_cast<double>(width);
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t base = r * width;
          if (Tensor* gx = c.in_grads[0]) {
            double sum_d = 0.0, sum_dx = 0.0;
            for (std::size_t j = 0; j < width; ++j) {
              const double d = g[base + j] * gv[j];
              sum_d += d;
              sum_dx += d * normalized[base + j];
            }
            for (std::size_t j = 0; j < width; ++j) {
              const double d = g[base + j] * gv[j];
              (*gx)[base + j] += inv_std[r] / n *
                                 (n * d - sum_d - normalized[base + j] * sum_dx);
            }
          }
          if (Tensor* gg = c.in_grads[1]) {
            for (std::size_t j = 0; j < width; ++j) {
              (*gg)[j] += g[base + j] * normalized[base + j];
            }
          }
          if (Tensor* gb = c.in_grads[2]) {
            for (std::size_t j = 0; j < width; ++j) (*gb)[j] += g[base + j];
          }
        }
      });
}

Var Conv1dTemporal(Var x, Var weight, Var bias) {
  RequireRank(x, 2, "conv1d_temporal");
  RequireRank(weight, 3, "conv1d_temporal");
  RequireRank(bias, 1, "conv1d_temporal");
  const std::size_t steps = x.shape()[0], cin = x.shape()[1];
  const std::size_t cout = weight.shape()[0], kernel = weight.shape()[2];
  if (kernel % 2 == 0) {
    throw ConfigError("conv1d_temporal: kernel size " + std::to_string(kernel) +
                      " is even; only odd kernels keep the length");
  }
  if (weight.shape()[1] != cin || bias.shape()[0] != cout) {
    throw DimensionError("conv1d_temporal: input " + ShapeToString(x.shape()) +
                         ", weight " + ShapeToString(weight.shape()) +
                         ", bias " + ShapeToString(bias.shape()));
  }
  const std::size_t pad = (kernel - 1) / 2;
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  Tensor out({steps, cout});
  for (std::size_t t = 0; t < steps; ++t) {
    double* orow = &out[t * cout];
    for (std::size_t o = 0; o < cout; ++o) orow[o] = bias.value()[o];
    for (std::size_t j = 0; j < kernel; ++j) {
      if (t + j < pad || t + j - pad >= steps) continue;
      const double* xrow = &xv[(t + j - pad) * cin];
      for (std::size_t o = 0; o < cout; ++o) {
        double acc = 0.0;
        for (std::size_t ci = 0; ci < cin; ++ci) {
          acc += wv[(o * cin + ci) * kernel + j] * xrow[ci];
        }
        orow[o] += acc;
      }
    }
  }
  return x.tape().Record(
      std::move(out), {x, weight, bias},
      [steps, cin, cout, kernel, pad](const BackwardContext& c) {
        const Tensor& xv = *c.inputs[0];
        const Tensor& wv = *c.inputs[1];
        const Tensor& g = c.out_grad;
        Tensor* gx = c.in_grads[0];
        Tensor* gw = c.in_grads[1];
        Tensor* gb = c.in_grads[2];
        for (std::size_t t = 0; t < steps; ++t) {
          const double* grow = &g[t * cout];
          if (gb) {
            for (std::size_t o = 0; o < cout; ++o) (*gb)[o] += grow[o];
          }
          for (std::size_t j = 0; j < kernel; ++j) {
            if (t + j < pad || t + j - pad >= steps) continue;
            const std::size_t src = (t + j - pad) * cin;
            for (std::size_t o = 0; o < cout; ++o) {
              const double go = grow[o];
              if (go == 0.0) continue;
              for (std::size_t ci = 0; ci < cin; ++ci) {
                const std::size_t widx = (o * cin + ci) * kernel + j;
                if (gx) (*gx)[src + ci] += go * wv[widx];
                if (gw) (*gw)[widx] += go * xv[src + ci];
              }
            }
          }
        }
      });
}

Var Sigmoid(Var x) {
  return Unary(
      x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var LeakyRelu(Var x, double slope) {
  return Unary(
      x, [slope](double v) { return v >= 0 ? v : slope * v; },
      [slope](double v, double) { return v >= 0 ? 1.0 : slope; });
}

Var Relu(Var x) {
  return Unary(
      x, [](double v) { return v > 0 ? v : 0.0; },
      [](double v, double) { return v > 0 ? 1.0 : 0.0; });
}

Var Abs(Var x) {
  return Unary(
      x, [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

Var Square(Var x) {
  return Unary(
      x, [](double v) { return v * v; },
      [](double v, double) { return 2.0 * v; });
}

Var Sqrt(Var x) {
  return Unary(
      x, [](double v) { return std::sqrt(v); },
      [](double, double y) { return 0.5 / y; });
}

Var Log(Var x) {
  return Unary(
      x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

std::vector<std::size_t> TopkIndices(std::span<const double> values,
                                     std::size_t k) {
  if (k == 0 || k > values.size()) {
    throw ArgumentError("topk: k=" + std::to_string(k) + " outside [1, " +
                        std::to_string(values.size()) + "]");
  }
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k),
                    idx.end(), [&](std::size_t a, std::size_t b) {
                      if (values[a] != values[b]) return values[a] > values[b];
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

Var TopkMeanRows(Var m, std::size_t k) {
  const auto [rows, cols] = RowsCols(m.value(), "topk_mean");
  const Tensor& mv = m.value();
  std::vector<std::size_t> selected;
  selected.reserve(rows * k);
  Tensor out({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = mv.data().subspan(r * cols, cols);
    double total = 0.0;
    for (std::size_t i : TopkIndices(row, k)) {
      total += row[i];
      selected.push_back(r * cols + i);
    }
    out[r] = total / static_cast<double>(k);
  }
  return m.tape().Record(
      std::move(out), {m},
      [k, selected = std::move(selected)](const BackwardContext& c) {
        Tensor* g = c.in_grads[0];
        if (!g) return;
        const double w = 1.0 / static_cast<double>(k);
        for (std::size_t n = 0; n < selected.size(); ++n) {
          (*g)[selected[n]] += c.out_grad[n / k] * w;
        }
      });
}

Var TopkMean(Var values, std::size_t k) {
  RequireRank(values, 1, "topk_mean");
  return Reshape(TopkMeanRows(values, k), {});
}

Var StopGradient(Var x) { return x.tape().Detach(x); }

Var CosineDistance(Var a, Var b) {
  RequireRank(a, 1, "cosine_distance");
  RequireSameShape(a, b, "cosine_distance");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    dot += av[i] * bv[i];
    na += av[i] * av[i];
    nb += bv[i] * bv[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  const bool a_floored = na < kCosineNormFloor;
  const bool b_floored = nb < kCosineNormFloor;
  na = std::max(na, kCosineNormFloor);
  nb = std::max(nb, kCosineNormFloor);
  const double cosine = dot / (na * nb);
  return a.tape().Record(
      ScalarValue(1.0 - cosine), {a, b},
      [na, nb, cosine, a_floored, b_floored](const BackwardContext& c) {
        const Tensor& av = *c.inputs[0];
        const Tensor& bv = *c.inputs[1];
        const double g = c.out_grad[0];
        if (Tensor* ga = c.in_grads[0]) {
          for (std::size_t i = 0; i < av.size(); ++i) {
            double d = bv[i] / (na * nb);
            if (!a_floored) d -= cosine * av[i] / (na * na);
            (*ga)[i] -= g * d;
          }
        }
        if (Tensor* gb = c.in_grads[1]) {
          for (std::size_t i = 0; i < bv.size(); ++i) {
            double d = av[i] / (na * nb);
            if (!b_floored) d -= cosine * bv[i] / (nb * nb);
            (*gb)[i] -= g * d;
          }
        }
      });
}

Var Sum(Var a) {
  const Tensor& av = a.value();
  const double total = std::accumulate(av.values().begin(), av.values().end(), 0.0);
  return a.tape().Record(ScalarValue(total), {a},
                         [](const BackwardContext& c) {
                           Tensor* g = c.in_grads[0];
                           if (!g) return;
                           for (double& x : g->data()) x += c.out_grad[0];
                         });
}

Var Mean(Var a) {
  if (a.value().size() == 0) throw ArgumentError("mean: empty tensor");
  return Scale(Sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var Dot(Var a, Var b) { return Sum(Mul(a, b)); }

Var Row(Var m, std::size_t r) {
  RequireRank(m, 2, "row");
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  if (r >= rows) {
    throw ArgumentError("row: index " + std::to_string(r) + " of " +
                        ShapeToString(m.shape()));
  }
  Tensor out({cols});
  for (std::size_t j = 0; j < cols; ++j) out[j] = m.value()[r * cols + j];
  return m.tape().Record(std::move(out), {m},
                         [r, cols](const BackwardContext& c) {
                           Tensor* g = c.in_grads[0];
                           if (!g) return;
                           for (std::size_t j = 0; j < cols; ++j) {
                             (*g)[r * cols + j] += c.out_grad[j];
                           }
                         });
}

Var Column(Var m, std::size_t col) {
  RequireRank(m, 2, "column");
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  if (col >= cols) {
    throw ArgumentError("column: index " + std::to_string(col) + " of " +
                        ShapeToString(m.shape()));
  }
  Tensor out({rows});
  for (std::size_t r = 0; r < rows; ++r) out[r] = m.value()[r * cols + col];
  return m.tape().Record(std::move(out), {m},
                         [rows, cols, col](const BackwardContext& c) {
                           Tensor* g = c.in_grads[0];
                           if (!g) return;
                           for (std::size_t r = 0; r < rows; ++r) {
                             (*g)[r * cols + col] += c.out_grad[r];
                           }
                         });
}

Var SliceColumns(Var m, std::size_t begin, std::size_t end) {
  RequireRank(m, 2, "slice_columns");
  const std::size_t rows = m.shape()[0], cols = m.shape()[1];
  if (begin >= end || end > cols) {
    throw DimensionError("slice_columns: [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") of " +
                         ShapeToString(m.shape()));
  }
  const std::size_t width = end - begin;
  Tensor out({rows, width});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < width; ++j) {
      out[r * width + j] = m.value()[r * cols + begin + j];
    }
  }
  return m.tape().Record(
      std::move(out), {m}, [rows, cols, begin, width](const BackwardContext& c) {
        Tensor* g = c.in_grads[0];
        if (!g) return;
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < width; ++j) {
            (*g)[r * cols + begin + j] += c.out_grad[r * width + j];
          }
        }
      });
}

Var Reshape(Var a, Shape shape) {
  Tensor out = a.value().Reshaped(std::move(shape));
  return a.tape().Record(std::move(out), {a}, [](const BackwardContext& c) {
    Tensor* g = c.in_grads[0];
    if (!g) return;
    for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += c.out_grad[i];
  });
}

}  // namespace vqk
