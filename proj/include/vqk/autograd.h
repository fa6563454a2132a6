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
#ifndef VQK_AUTOGRAD_H_
#define VQK_AUTOGRAD_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vqk/tensor.h"

namespace vqk {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// What an op's backward function sees. in_grads[i] is null when input i does
// not need a gradient; otherwise the op adds its contribution into it.
struct BackwardContext {
  const Tensor& out_value;
  const Tensor& out_grad;
  std::span<const Tensor* const> inputs;
  std::span<Tensor* const> in_grads;
};

using BackwardFn = std::function<void(const BackwardContext&)>;

// Computation record for reverse-mode differentiation. Ops append nodes in
// execution order, so reverse index order is a valid topological order.
// Single-threaded; use one tape per worker.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that never receives a gradient.
  Var Constant(Tensor value);
  // Leaf that receives a gradient on Backward().
  Var Parameter(Tensor value);

  // Appends an op output. The node needs a gradient iff any input does; the
  // backward function is dropped otherwise.
  Var Record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  // Constant copy of x that blocks gradient flow. In replay mode the copy
  // takes the next stored value instead, so finite differences can hold
  // detached quantities at their base-point values.
  Var Detach(Var x);
  // Appends every subsequent Detach() value to `sink`; nullptr stops.
  void RecordDetachedInto(std::vector<Tensor>* sink) { detached_sink_ = sink; }
  // Serves subsequent Detach() calls from `source` in call order.
  void ReplayDetachedFrom(const std::vector<Tensor>* source) {
    detached_source_ = source;
    detached_cursor_ = 0;
  }

  // Recomputes every gradient from scratch, seeded with d(loss)/d(loss) = 1.
  // Throws ArgumentError unless loss holds exactly one element.
  void Backward(Var loss);

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const {
    return nodes_.at(id).requires_grad;
  }
  // Gradient from the last Backward(); zeros for nodes it did not reach.
  Tensor grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    bool requires_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::vector<Tensor>* detached_sink_ = nullptr;
  const std::vector<Tensor>* detached_source_ = nullptr;
  std::size_t detached_cursor_ = 0;
};

}  // namespace vqk

#endif  // VQK_AUTOGRAD_H_
