#include "lexda/autodiff/graph.hpp"

#include "lexda/error.hpp"

namespace lexda::ad {

const Tensor& Var::value() const {
  if (!graph_) throw ContractError("value() on an unbound Var");
  return graph_->value(*this);
}

Tensor GradientMap::operator[](Var v) const {
  graph_->check_owner(v);
  if (v.id() >= grads_.size()) return Tensor::zeros(v.shape());
  const auto& g = grads_[v.id()];
  return g ? *g : Tensor::zeros(v.shape());
}

Tensor GradientMap::operator[](const Parameter& p) const {
  for (const auto& [param, id] : graph_->parameters()) {
    if (param == &p) {
      if (id >= grads_.size()) break;
      const auto& g = grads_[id];
      return g ? *g : Tensor::zeros(p.value.shape());
    }
  }
  return Tensor::zeros(p.value.shape());
}

bool GradientMap::touched(Var v) const {
  graph_->check_owner(v);
  return v.id() < grads_.size() && grads_[v.id()].has_value();
}

void Graph::check_owner(Var v) const {
  if (v.graph() != this || v.id() >= nodes_.size()) {
    throw ContractError("Var does not belong to this graph");
  }
}

Var Graph::constant(Tensor value) {
  return record("constant", std::move(value), {}, nullptr);
}

Var Graph::variable(Tensor value) {
  Var v = record("variable", std::move(value), {}, nullptr);
  nodes_.back().requires_grad = mode_ == GradMode::enabled;
  return v;
}

Var Graph::parameter(Parameter& p) {
  if (auto it = param_index_.find(&p); it != param_index_.end()) return Var(this, it->second);
  Var v = variable(p.value);
  nodes_.back().op = "parameter";
  param_index_.emplace(&p, v.id());
  params_.emplace_back(&p, v.id());
  return v;
}

const Tensor& Graph::value(Var v) const {
  check_owner(v);
  return nodes_[v.id()].value;
}

bool Graph::requires_grad(Var v) const {
  check_owner(v);
  return nodes_[v.id()].requires_grad;
}

Var Graph::record(const char* op, Tensor value, std::vector<std::size_t> inputs,
                  BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by '") + op + "' (shape " +
                       shape_string(value.shape()) + ")");
  }
  bool needs = false;
  if (mode_ == GradMode::enabled) {
    for (auto id : inputs) needs = needs || nodes_[id].requires_grad;
  }
  if (!needs) backward = nullptr;
  nodes_.push_back(Node{op, std::move(value), std::move(inputs), std::move(backward), needs});
  return Var(this, nodes_.size() - 1);
}

GradientMap Graph::backward(Var loss) const {
  check_owner(loss);
  if (nodes_[loss.id()].value.size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        shape_string(nodes_[loss.id()].value.shape()));
  }
  GradientMap out;
  out.graph_ = this;
  out.grads_.resize(nodes_.size());
  out.grads_[loss.id()] = Tensor::filled(nodes_[loss.id()].value.shape(), 1.0);

  std::vector<Tensor*> slots;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    const Node& node = nodes_[i];
    if (!node.backward || !out.grads_[i]) continue;
    slots.assign(node.inputs.size(), nullptr);
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const auto in = node.inputs[k];
      if (!nodes_[in].requires_grad) continue;
      if (!out.grads_[in]) out.grads_[in] = Tensor::zeros(nodes_[in].value.shape());
      slots[k] = &*out.grads_[in];
    }
    node.backward(*this, *out.grads_[i], slots);
  }
  return out;
}

}  // namespace lexda::ad
