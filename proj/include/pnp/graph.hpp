#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pnp/tensor.hpp"

namespace pnp {

// Named tensor parameters with matching gradient accumulators. Gradients
// accumulate across backward sweeps and are zeroed explicitly by the
// training loop.
class ParamSet {
 public:
  void define(const std::string& name, Tensor value);
  bool contains(const std::string& name) const;
  const Tensor& value(const std::string& name) const;
  Tensor& mutable_value(const std::string& name);
  const Tensor& gradient(const std::string& name) const;
  void accumulate_gradient(const std::string& name, const Tensor& g);
  void zero_gradients();
  std::vector<std::string> names() const;  // sorted
  std::size_t size() const { return values_.size(); }
  bool operator==(const ParamSet& other) const {
    return values_ == other.values_;
  }

 private:
  std::map<std::string, Tensor> values_;
  std::map<std::string, Tensor> gradients_;
};

// Handle into one graph's node arena. Ids are dense and creation-ordered,
// so inputs always precede their consumers and the arena is a DAG by
// construction.
struct NodeRef {
  std::uint32_t id = 0;
  bool operator==(const NodeRef&) const = default;
  auto operator<=>(const NodeRef&) const = default;
};

enum class OpKind {
  kParameter,
  kConstant,
  kMatVec,
  kAdd,
  kTanh,
  kConcat,
  kMaxPool,
  kIndexScalar,
};

std::string op_kind_name(OpKind kind);

struct Node {
  OpKind kind;
  std::vector<NodeRef> inputs;
  std::string param_name;          // kParameter
  Tensor constant;                 // kConstant
  std::size_t extra = 0;           // kMaxPool: width; kIndexScalar: index
  std::optional<Tensor> value;     // forward cache
  std::optional<Tensor> adjoint;   // backward scratch, valid per sweep
};

// Append-only differentiable computation DAG. A graph lives for one
// inference call: nodes are only ever added, never removed, so NodeRefs
// stay valid while executions keep extending a shared graph. Forward
// evaluation is incremental (cached nodes are never recomputed) and
// backward accumulates parameter gradients into the bound ParamSet.
//
// Shape compatibility is checked when a node is first evaluated, not when
// it is added; errors name both offending shapes.
class Graph {
 public:
  explicit Graph(ParamSet& params) : params_(&params) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  NodeRef add_node(OpKind kind, std::vector<NodeRef> inputs);

  NodeRef parameter(const std::string& name);
  NodeRef constant(Tensor t);
  NodeRef matvec(NodeRef a, NodeRef x);
  NodeRef add(NodeRef a, NodeRef b);
  NodeRef tanh(NodeRef a);
  NodeRef concat(std::vector<NodeRef> parts);
  NodeRef maxpool(std::vector<NodeRef> rows, std::size_t width);
  NodeRef index_scalar(NodeRef a, std::size_t index);

  // Evaluates exactly the uncached ancestors of `node` and returns its value.
  const Tensor& forward(NodeRef node);

  // Reverse sweep from the given (node, adjoint) seeds. Every seeded node
  // must already be evaluated and every seed must match its node's value
  // shape. Parameter gradients are accumulated (+=) into the ParamSet, so
  // consecutive sweeps add up.
  void backward(const std::vector<std::pair<NodeRef, Tensor>>& seeds);

  std::size_t node_count() const { return nodes_.size(); }
  // Kernel evaluations performed so far; lets tests assert incrementality.
  std::size_t eval_count() const { return eval_count_; }

  const Node& node(NodeRef ref) const;
  ParamSet& params() { return *params_; }
  const ParamSet& params() const { return *params_; }

 private:
  Node& node_mut(NodeRef ref);
  void check_ref(NodeRef ref) const;
  Tensor compute_value(const Node& n);

  ParamSet* params_;
  std::vector<Node> nodes_;
  std::size_t eval_count_ = 0;
};

}  // namespace pnp
