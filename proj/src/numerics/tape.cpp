// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/numerics/tape.hpp"

#include <cmath>

#include "streamrope/numerics/errors.hpp"

namespace streamrope::numerics {

ParameterStore::ParameterStore(const ParameterStore& other) { *this = other; }

ParameterStore& ParameterStore::operator=(const ParameterStore& other) {
  if (this == &other) return *this;
  params_.clear();
  index_.clear();
  for (const auto& p : other.params_) {
    index_[p->name] = params_.size();
    params_.push_back(std::make_unique<Parameter>(*p));
  }
  return *this;
}

Parameter& ParameterStore::create(std::string name, DenseMatrix init) {
  if (index_.contains(name)) throw ConfigurationError("duplicate parameter '" + name + "'");
  index_[name] = params_.size();
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->grad = DenseMatrix(init.rows(), init.cols());
  p->value = std::move(init);
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::at(const std::string& name) {
  auto* p = find(name);
  if (p == nullptr) throw ConfigurationError("unknown parameter '" + name + "'");
  return *p;
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigurationError("unknown parameter '" + name + "'");
  return *params_[it->second];
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad = DenseMatrix(p->value.rows(), p->value.cols());
}

const DenseMatrix& Var::value() const { return tape_->value(*this); }

double Var::scalar() const {
  const auto& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw ConfigurationError("Var::scalar on non-1x1 value");
  return v(0, 0);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::constant(DenseMatrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(DenseMatrix value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  Node n;
  n.external = &p.value;
  n.requires_grad = true;
  n.param = &p;
  Var v = push(std::move(n));
  param_nodes_[&p] = v.id();
  return v;
}

Var Tape::record(DenseMatrix value, std::span<const Var> inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw ConfigurationError("Tape::record: input from a different tape");
    if (nodes_[in.id()].requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const DenseMatrix& Tape::value(Var v) const {
  const Node& n = nodes_[v.id()];
  return n.external != nullptr ? *n.external : n.value;
}

DenseMatrix& Tape::grad_buffer(Var v) {
  Node& n = nodes_[v.id()];
  if (!n.has_grad) {
    const auto& val = value(v);
    n.grad = DenseMatrix(val.rows(), val.cols());
    n.has_grad = true;
  }
  return n.grad;
}

const DenseMatrix& Tape::grad(Var v) { return grad_buffer(v); }

void Tape::accumulate(Var v, DenseMatrix g) {
  Node& n = nodes_[v.id()];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    const auto& val = value(v);
    if (!g.same_shape(val)) throw ConfigurationError("accumulate: gradient shape mismatch");
    n.grad = std::move(g);
    n.has_grad = true;
    return;
  }
  n.grad += g;
}

void Tape::backprop(Var loss) {
  if (loss.tape_ != this) throw ConfigurationError("backprop: loss belongs to another tape");
  if (!nodes_[loss.id()].requires_grad) {
    throw ConfigurationError("backprop: loss is not connected to any tracked value");
  }
  const auto& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) throw ConfigurationError("backprop: loss must be 1x1");
  if (!std::isfinite(lv(0, 0))) throw NumericalError("backprop: loss is not finite");
  if (backprop_done_) throw ConfigurationError("backprop: tape already replayed");
  backprop_done_ = true;

  grad_buffer(loss)(0, 0) = 1.0;
  trace_.clear();
  for (std::int64_t i = loss.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || !n.has_grad || !n.backward) continue;
    trace_.push_back(static_cast<std::uint32_t>(i));
    n.backward(*this, Var(this, static_cast<std::uint32_t>(i)));
  }
  for (Node& n : nodes_) {
    if (n.param != nullptr && n.has_grad) n.param->grad += n.grad;
  }
}

}  // namespace streamrope::numerics
