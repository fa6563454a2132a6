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
#include "vqk/autograd.h"

#include <string>
#include <utility>

namespace vqk {

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::Constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), false, {}, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::Detach(Var x) {
  if (detached_source_ != nullptr) {
    if (detached_cursor_ >= detached_source_->size()) {
      throw ArgumentError("detach replay: more calls than recorded values");
    }
    const Tensor& stored = (*detached_source_)[detached_cursor_++];
    if (stored.shape() != x.shape()) {
      throw DimensionError("detach replay: recorded " +
                           ShapeToString(stored.shape()) + " vs " +
                           ShapeToString(x.shape()));
    }
    return Constant(stored);
  }
  if (detached_sink_ != nullptr) detached_sink_->push_back(x.value());
  return Constant(x.value());
}

Var Tape::Parameter(Tensor value) {
  nodes_.push_back(Node{std::move(value), true, {}, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::Record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.tape() != this) {
      throw ArgumentError("tape: input recorded on a different tape");
    }
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::Backward(Var loss) {
  if (&loss.tape() != this) {
    throw ArgumentError("backward: loss recorded on a different tape");
  }
  const Tensor& loss_value = nodes_[loss.id()].value;
  if (loss_value.size() != 1) {
    throw ArgumentError("backward: seed must be a scalar, got shape " +
                        ShapeToString(loss_value.shape()));
  }

  grads_.assign(nodes_.size(), Tensor());
  for (std::size_t i = 0; i <= loss.id(); ++i) {
    if (nodes_[i].requires_grad) grads_[i] = Tensor(nodes_[i].value.shape());
  }
  if (!nodes_[loss.id()].requires_grad) return;
  grads_[loss.id()][0] = 1.0;

  std::vector<const Tensor*> inputs;
  std::vector<Tensor*> in_grads;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward) continue;
    inputs.clear();
    in_grads.clear();
    for (std::size_t in : node.inputs) {
      inputs.push_back(&nodes_[in].value);
      in_grads.push_back(nodes_[in].requires_grad ? &grads_[in] : nullptr);
    }
    node.backward(BackwardContext{node.value, grads_[i], inputs, in_grads});
  }
}

Tensor Tape::grad(Var v) const {
  if (v.id() < grads_.size() && grads_[v.id()].size() > 0) {
    return grads_[v.id()];
  }
  return Tensor(nodes_.at(v.id()).value.shape());
}

}  // namespace vqk
