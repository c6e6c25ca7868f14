// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "streamrope/numerics/dense_matrix.hpp"

namespace streamrope::numerics {

struct Parameter {
  std::string name;
  DenseMatrix value;
  DenseMatrix grad;
};

// Owns trainable parameters in creation order. Addresses are stable for the
// lifetime of the store.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore& other);
  ParameterStore& operator=(const ParameterStore& other);
  ParameterStore(ParameterStore&&) noexcept = default;
  ParameterStore& operator=(ParameterStore&&) noexcept = default;

  Parameter& create(std::string name, DenseMatrix init);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  Parameter* find(const std::string& name);

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }
  std::vector<Parameter*> all();

  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

// Handle to a value recorded on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }

  const DenseMatrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Flat reverse-mode record. Nodes are appended in creation order and replayed
// strictly backwards; parameter gradients are accumulated into
// `Parameter::grad` when `backprop` finishes.
class Tape {
 public:
  using Backward = std::function<void(Tape&, Var self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(DenseMatrix value);
  Var variable(DenseMatrix value);
  Var param(Parameter& p);

  // The output requires a gradient iff any input does; `backward` is dropped
  // otherwise.
  Var record(DenseMatrix value, std::span<const Var> inputs, Backward backward);
  Var record(DenseMatrix value, std::initializer_list<Var> inputs, Backward backward) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }

  const DenseMatrix& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  // Gradient accumulated so far (zeros if nothing reached the node).
  const DenseMatrix& grad(Var v);
  DenseMatrix& grad_buffer(Var v);
  // Adds g into v's gradient; the first contribution is moved in.
  void accumulate(Var v, DenseMatrix g);

  void backprop(Var loss);

  // Node ids whose backward closures ran, in execution order.
  std::span<const std::uint32_t> backward_trace() const { return trace_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    DenseMatrix value;
    const DenseMatrix* external = nullptr;
    DenseMatrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    Parameter* param = nullptr;
    Backward backward;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::uint32_t> param_nodes_;
  std::vector<std::uint32_t> trace_;
  bool backprop_done_ = false;
};

}  // namespace streamrope::numerics
