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
#ifndef VQK_OPS_H_
#define VQK_OPS_H_

// Differentiable ops recorded on a Tape. Only the broadcasting patterns the
// model needs are supported (row bias, per-column scaling, scalar divide);
// everything else requires identical shapes.

#include <cstddef>
#include <span>
#include <vector>

#include "vqk/autograd.h"

namespace vqk {

inline constexpr double kCosineNormFloor = 1e-8;

// [M x K] . [K x N] -> [M x N].
Var MatMul(Var a, Var b);
// [M x N] -> [N x M].
Var Transpose(Var a);

Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double factor);
Var AddScalar(Var a, double offset);
// Every entry of a divided by the single value held in s.
Var DivByScalar(Var a, Var s);

// m[r, c] + bias[c].
Var AddRowBias(Var m, Var bias);
// m[r, c] * s[c]. Used for background suppression of a T-CAM.
Var ScaleColumns(Var m, Var s);

// Row-wise softmax with max subtraction. A rank-1 input is one row.
Var SoftmaxRows(Var m);
Var LogSoftmaxRows(Var m);

// Normalizes each vector along the last dimension to zero mean and unit
// variance (biased), then applies gain and bias.
Var LayerNorm(Var v, Var gain, Var bias, double eps);

// Same-length temporal convolution. x: [T x Cin], weight: [Cout x Cin x k]
// with odd k, bias: [Cout]. Zero padding (k - 1) / 2, stride 1.
Var Conv1dTemporal(Var x, Var weight, Var bias);

Var Sigmoid(Var x);
Var LeakyRelu(Var x, double slope);
Var Relu(Var x);
Var Abs(Var x);
Var Square(Var x);
Var Sqrt(Var x);
Var Log(Var x);

// Indices of the k largest entries, highest value first; equal values are
// ordered by lowest index.
std::vector<std::size_t> TopkIndices(std::span<const double> values,
                                     std::size_t k);
// Mean of the k largest entries of a vector, as a scalar.
Var TopkMean(Var values, std::size_t k);
// TopkMean applied to every row of a matrix; returns a vector.
Var TopkMeanRows(Var m, std::size_t k);

// Identity on values, blocks the gradient.
Var StopGradient(Var x);

// 1 - cos(a, b) with each norm floored at kCosineNormFloor.
Var CosineDistance(Var a, Var b);

Var Sum(Var a);
Var Mean(Var a);
Var Dot(Var a, Var b);

Var Row(Var m, std::size_t r);
Var Column(Var m, std::size_t c);
// Columns [begin, end) of a matrix.
Var SliceColumns(Var m, std::size_t begin, std::size_t end);
Var Reshape(Var a, Shape shape);

}  // namespace vqk

#endif  // VQK_OPS_H_
