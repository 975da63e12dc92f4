#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lexda/autodiff/graph.hpp"

namespace lexda::nn {

enum class Init { glorot_uniform, zeros, ones, embedding_normal };

/// Owns every trainable tensor of a model. Addresses are stable, so layers
/// and graphs keep raw pointers. Initialization draws from a stream derived
/// from (seed, parameter name); adding a parameter never perturbs the others.
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : seed_(seed) {}
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  /// Throws ConfigError if the name is taken.
  ad::Parameter& add(const std::string& name, ad::Shape shape, Init init);

  ad::Parameter* find(const std::string& name);
  const ad::Parameter* find(const std::string& name) const;
  ad::Parameter& at(const std::string& name);

  /// In creation order.
  std::vector<ad::Parameter*> all();
  std::vector<const ad::Parameter*> all() const;
  std::vector<ad::Parameter*> with_prefix(const std::string& prefix);

  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const;
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::deque<ad::Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace lexda::nn
