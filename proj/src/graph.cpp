#include "pnp/graph.hpp"

#include <algorithm>
#include <cmath>

#include "pnp/errors.hpp"

namespace pnp {

void ParamSet::define(const std::string& name, Tensor value) {
  if (values_.count(name)) {
    throw GraphError("parameter '" + name + "' already defined");
  }
  gradients_.emplace(name, Tensor::zeros(value.shape()));
  values_.emplace(name, std::move(value));
}

bool ParamSet::contains(const std::string& name) const {
  return values_.count(name) > 0;
}

const Tensor& ParamSet::value(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw GraphError("unknown parameter '" + name + "'");
  return it->second;
}

Tensor& ParamSet::mutable_value(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw GraphError("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamSet::gradient(const std::string& name) const {
  auto it = gradients_.find(name);
  if (it == gradients_.end()) {
    throw GraphError("unknown parameter '" + name + "'");
  }
  return it->second;
}

void ParamSet::accumulate_gradient(const std::string& name, const Tensor& g) {
  auto it = gradients_.find(name);
  if (it == gradients_.end()) {
    throw GraphError("unknown parameter '" + name + "'");
  }
  if (!it->second.same_shape(g)) {
    throw ShapeError("gradient for '" + name + "': shape " +
                     shape_to_string(g.shape()) + " does not match parameter " +
                     shape_to_string(it->second.shape()));
  }
  for (std::size_t i = 0; i < g.size(); ++i) it->second[i] += g[i];
}

void ParamSet::zero_gradients() {
  for (auto& [name, g] : gradients_) {
    std::fill(g.mutable_values().begin(), g.mutable_values().end(), 0.0);
  }
}

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [name, value] : values_) out.push_back(name);
  return out;
}

std::string op_kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::kParameter: return "parameter";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatVec: return "matvec";
    case OpKind::kAdd: return "add";
    case OpKind::kTanh: return "tanh";
    case OpKind::kConcat: return "concat";
    case OpKind::kMaxPool: return "maxpool";
    case OpKind::kIndexScalar: return "index-scalar";
  }
  return "?";
}

namespace {

void check_arity(OpKind kind, std::size_t n) {
  auto fail = [&](const char* want) {
    throw GraphError(std::string("node kind ") + op_kind_name(kind) +
                     " expects " + want + " inputs, got " + std::to_string(n));
  };
  switch (kind) {
    case OpKind::kParameter:
    case OpKind::kConstant:
      if (n != 0) fail("no");
      break;
    case OpKind::kMatVec:
    case OpKind::kAdd:
      if (n != 2) fail("2");
      break;
    case OpKind::kTanh:
    case OpKind::kIndexScalar:
      if (n != 1) fail("1");
      break;
    case OpKind::kConcat:
      if (n == 0) fail("at least 1");
      break;
    case OpKind::kMaxPool:
      break;  // any number of rows, including zero
  }
}

}  // namespace

void Graph::check_ref(NodeRef ref) const {
  if (ref.id >= nodes_.size()) {
    throw GraphError("node ref " + std::to_string(ref.id) +
                     " not in this graph (size " +
                     std::to_string(nodes_.size()) + ")");
  }
}

const Node& Graph::node(NodeRef ref) const {
  check_ref(ref);
  return nodes_[ref.id];
}

Node& Graph::node_mut(NodeRef ref) {
  check_ref(ref);
  return nodes_[ref.id];
}

NodeRef Graph::add_node(OpKind kind, std::vector<NodeRef> inputs) {
  check_arity(kind, inputs.size());
  for (NodeRef in : inputs) check_ref(in);
  Node n;
  n.kind = kind;
  n.inputs = std::move(inputs);
  nodes_.push_back(std::move(n));
  return NodeRef{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeRef Graph::parameter(const std::string& name) {
  if (!params_->contains(name)) {
    throw GraphError("unknown parameter '" + name + "'");
  }
  NodeRef ref = add_node(OpKind::kParameter, {});
  nodes_[ref.id].param_name = name;
  return ref;
}

NodeRef Graph::constant(Tensor t) {
  NodeRef ref = add_node(OpKind::kConstant, {});
  nodes_[ref.id].constant = std::move(t);
  return ref;
}

NodeRef Graph::matvec(NodeRef a, NodeRef x) {
  return add_node(OpKind::kMatVec, {a, x});
}

NodeRef Graph::add(NodeRef a, NodeRef b) {
  return add_node(OpKind::kAdd, {a, b});
}

NodeRef Graph::tanh(NodeRef a) { return add_node(OpKind::kTanh, {a}); }

NodeRef Graph::concat(std::vector<NodeRef> parts) {
  return add_node(OpKind::kConcat, std::move(parts));
}

NodeRef Graph::maxpool(std::vector<NodeRef> rows, std::size_t width) {
  NodeRef ref = add_node(OpKind::kMaxPool, std::move(rows));
  nodes_[ref.id].extra = width;
  return ref;
}

NodeRef Graph::index_scalar(NodeRef a, std::size_t index) {
  NodeRef ref = add_node(OpKind::kIndexScalar, {a});
  nodes_[ref.id].extra = index;
  return ref;
}

Tensor Graph::compute_value(const Node& n) {
  auto in = [&](std::size_t i) -> const Tensor& {
    return *nodes_[n.inputs[i].id].value;
  };
  switch (n.kind) {
    case OpKind::kParameter:
      return params_->value(n.param_name);
    case OpKind::kConstant:
      return n.constant;
    case OpKind::kMatVec:
      return pnp::matvec(in(0), in(1));
    case OpKind::kAdd:
      return pnp::add(in(0), in(1));
    case OpKind::kTanh:
      return pnp::tanh(in(0));
    case OpKind::kConcat: {
      std::vector<Tensor> parts;
      parts.reserve(n.inputs.size());
      for (std::size_t i = 0; i < n.inputs.size(); ++i) parts.push_back(in(i));
      return pnp::concat(parts);
    }
    case OpKind::kMaxPool: {
      std::vector<Tensor> rows;
      rows.reserve(n.inputs.size());
      for (std::size_t i = 0; i < n.inputs.size(); ++i) rows.push_back(in(i));
      return pnp::maxpool(rows, n.extra);
    }
    case OpKind::kIndexScalar: {
      const Tensor& v = in(0);
      if (n.extra >= v.size()) {
        throw GraphError("index-scalar: index " + std::to_string(n.extra) +
                         " out of range for " + std::to_string(v.size()) +
                         " elements");
      }
      return Tensor::scalar(v[n.extra]);
    }
  }
  throw GraphError("unreachable node kind");
}

const Tensor& Graph::forward(NodeRef target) {
  check_ref(target);
  if (nodes_[target.id].value) return *nodes_[target.id].value;

  // Iterative post-order over uncached ancestors; inputs have smaller ids
  // than consumers so no cycle handling is needed.
  std::vector<std::pair<std::uint32_t, bool>> stack{{target.id, false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    Node& n = nodes_[id];
    if (n.value) continue;
    if (expanded) {
      n.value = compute_value(n);
      ++eval_count_;
      continue;
    }
    stack.push_back({id, true});
    for (NodeRef in : n.inputs) {
      if (!nodes_[in.id].value) stack.push_back({in.id, false});
    }
  }
  return *nodes_[target.id].value;
}

void Graph::backward(const std::vector<std::pair<NodeRef, Tensor>>& seeds) {
  for (Node& n : nodes_) n.adjoint.reset();

  std::uint32_t highest = 0;
  for (const auto& [ref, seed] : seeds) {
    check_ref(ref);
    Node& n = nodes_[ref.id];
    if (!n.value) {
      throw GraphError("backward: node " + std::to_string(ref.id) +
                       " has not been evaluated");
    }
    if (!n.value->same_shape(seed)) {
      throw ShapeError("backward seed shape " + shape_to_string(seed.shape()) +
                       " does not match node value " +
                       shape_to_string(n.value->shape()));
    }
    if (!n.adjoint) n.adjoint = Tensor::zeros(n.value->shape());
    for (std::size_t i = 0; i < seed.size(); ++i) (*n.adjoint)[i] += seed[i];
    highest = std::max(highest, ref.id);
  }
  if (seeds.empty()) return;

  auto bump = [&](NodeRef in, std::size_t at, double g) {
    Node& src = nodes_[in.id];
    if (!src.adjoint) src.adjoint = Tensor::zeros(src.value->shape());
    (*src.adjoint)[at] += g;
  };

  for (std::uint32_t id = highest + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.adjoint) continue;
    const Tensor& g = *n.adjoint;
    switch (n.kind) {
      case OpKind::kParameter:
        params_->accumulate_gradient(n.param_name, g);
        break;
      case OpKind::kConstant:
        break;
      case OpKind::kMatVec: {
        const Tensor& a = *nodes_[n.inputs[0].id].value;
        const Tensor& x = *nodes_[n.inputs[1].id].value;
        std::size_t m = a.shape()[0], k = a.shape()[1];
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < k; ++j) {
            bump(n.inputs[0], i * k + j, g[i] * x[j]);  // dA = g xᵀ
            bump(n.inputs[1], j, g[i] * a.at2(i, j));   // dx = Aᵀ g
          }
        }
        break;
      }
      case OpKind::kAdd:
        for (std::size_t i = 0; i < g.size(); ++i) {
          bump(n.inputs[0], i, g[i]);
          bump(n.inputs[1], i, g[i]);
        }
        break;
      case OpKind::kTanh: {
        const Tensor& y = *n.value;
        for (std::size_t i = 0; i < g.size(); ++i) {
          bump(n.inputs[0], i, g[i] * (1.0 - y[i] * y[i]));
        }
        break;
      }
      case OpKind::kConcat: {
        std::size_t offset = 0;
        for (NodeRef in : n.inputs) {
          std::size_t len = nodes_[in.id].value->size();
          for (std::size_t i = 0; i < len; ++i) bump(in, i, g[offset + i]);
          offset += len;
        }
        break;
      }
      case OpKind::kMaxPool: {
        // Adjoint routed to one argmax row per column, lowest row on ties.
        if (n.inputs.empty()) break;
        for (std::size_t j = 0; j < n.extra; ++j) {
          std::size_t best = 0;
          double best_v = (*nodes_[n.inputs[0].id].value)[j];
          for (std::size_t r = 1; r < n.inputs.size(); ++r) {
            double v = (*nodes_[n.inputs[r].id].value)[j];
            if (v > best_v) {
              best_v = v;
              best = r;
            }
          }
          bump(n.inputs[best], j, g[j]);
        }
        break;
      }
      case OpKind::kIndexScalar:
        bump(n.inputs[0], n.extra, g[0]);
        break;
    }
  }
}

}  // namespace pnp
