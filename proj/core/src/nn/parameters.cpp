#include "lexda/nn/parameters.hpp"

#include <cmath>

#include "lexda/error.hpp"
#include "lexda/random.hpp"

namespace lexda::nn {

ad::Parameter& ParameterStore::add(const std::string& name, ad::Shape shape, Init init) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  ad::Tensor value(shape);
  Rng rng = derive_rng(seed_, "init/" + name);
  switch (init) {
    case Init::zeros:
      break;
    case Init::ones:
      for (double& v : value.values()) v = 1.0;
      break;
    case Init::glorot_uniform: {
      const double fan_in = static_cast<double>(value.rank() == 1 ? 1 : shape.front());
      const double fan_out = static_cast<double>(shape.back());
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      for (double& v : value.values()) v = uniform(rng, -limit, limit);
      break;
    }
    case Init::embedding_normal:
      for (double& v : value.values()) v = 0.02 * standard_normal(rng);
      break;
  }
  params_.push_back(ad::Parameter{name, std::move(value)});
  index_.emplace(name, params_.size() - 1);
  return params_.back();
}

ad::Parameter* ParameterStore::find(const std::string& name) {
  const auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

const ad::Parameter* ParameterStore::find(const std::string& name) const {
  const auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

ad::Parameter& ParameterStore::at(const std::string& name) {
  if (auto* p = find(name)) return *p;
  throw ConfigError("unknown parameter '" + name + "'");
}

std::vector<ad::Parameter*> ParameterStore::all() {
  std::vector<ad::Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const ad::Parameter*> ParameterStore::all() const {
  std::vector<const ad::Parameter*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<ad::Parameter*> ParameterStore::with_prefix(const std::string& prefix) {
  std::vector<ad::Parameter*> out;
  for (auto& p : params_) {
    if (p.name.starts_with(prefix)) out.push_back(&p);
  }
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

}  // namespace lexda::nn
