#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lexda/autodiff/tensor.hpp"

namespace lexda::ad {

/// A named trainable tensor. Owned by a ParameterStore; graphs refer to it.
struct Parameter {
  std::string name;
  Tensor value;
};

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;

  Graph* graph() const noexcept { return graph_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Result of Graph::backward. Nodes the loss does not depend on report zeros.
class GradientMap {
 public:
  Tensor operator[](Var v) const;
  /// Gradient for a parameter registered in the graph; zeros of the
  /// parameter's shape if it never entered the graph.
  Tensor operator[](const Parameter& p) const;
  bool touched(Var v) const;

 private:
  friend class Graph;
  const Graph* graph_ = nullptr;
  std::vector<std::optional<Tensor>> grads_;
};

enum class GradMode { enabled, disabled };

/// Append-only tape. Inputs always precede the nodes that consume them, so
/// reverse insertion order is a valid topological order for backward.
class Graph {
 public:
  /// Accumulates (+=) into every non-null input gradient slot.
  using BackwardFn = std::function<void(const Graph&, const Tensor& grad_out,
                                        std::span<Tensor* const> input_grads)>;

  explicit Graph(GradMode mode = GradMode::enabled) : mode_(mode) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Leaf that receives a gradient (used for inputs under test).
  Var variable(Tensor value);
  /// Leaf bound to a parameter; registering the same parameter twice
  /// returns the same node.
  Var parameter(Parameter& p);

  const Tensor& value(Var v) const;
  const Tensor& value_at(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }
  GradMode mode() const noexcept { return mode_; }

  /// Parameters in registration order, paired with their node id.
  const std::vector<std::pair<Parameter*, std::size_t>>& parameters() const noexcept {
    return params_;
  }

  /// Reverse-mode sweep from a one-element loss. Does not modify the graph.
  GradientMap backward(Var loss) const;

  /// Adds an operation node. Throws NumericError when `value` is not finite.
  Var record(const char* op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  void check_owner(Var v) const;

 private:
  struct Node {
    const char* op;
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad;
  };

  GradMode mode_;
  std::vector<Node> nodes_;
  std::vector<std::pair<Parameter*, std::size_t>> params_;
  std::unordered_map<const Parameter*, std::size_t> param_index_;
};

}  // namespace lexda::ad
