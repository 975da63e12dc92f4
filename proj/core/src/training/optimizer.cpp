#include "lexda/training/optimizer.hpp"

#include <cmath>
#include <set>

#include "lexda/error.hpp"

namespace lexda::training {

double lambda_schedule(std::size_t epoch, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  return 2.0 / (1.0 + std::exp(-gamma * static_cast<double>(epoch))) - 1.0;
}

ScheduleState::ScheduleState(double g) : gamma(g) { lambda = lambda_schedule(0, gamma); }

void ScheduleState::advance() {
  ++epoch;
  lambda = lambda_schedule(epoch, gamma);
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("AdamW betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("AdamW epsilon must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
  if (!(clip_norm >= 0.0)) throw ConfigError("clip norm must be non-negative");
}

void adamw_step(std::span<ad::Parameter* const> params, std::span<const ad::Tensor> grads,
                std::span<AdamMoments> moments, const OptimizerConfig& c, long step) {
  if (step <= 0) throw ContractError("adamw_step: step count must be positive");
  if (grads.size() != params.size() || moments.size() != params.size()) {
    throw ContractError("adamw_step: parameters, gradients and moments differ in number");
  }
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto theta = params[k]->value.values();
    const auto g = grads[k].values();
    if (g.size() != theta.size()) {
      throw DimensionError("adamw_step: gradient shape differs for '" + params[k]->name + "'");
    }
    auto& mo = moments[k];
    if (mo.m.size() != theta.size()) {
      mo.m = ad::Tensor::zeros(params[k]->value.shape());
      mo.v = ad::Tensor::zeros(params[k]->value.shape());
    }
    auto m = mo.m.values();
    auto v = mo.v.values();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= c.learning_rate * (c.weight_decay * theta[i] + m_hat / (std::sqrt(v_hat) + c.epsilon));
    }
  }
}

AdamW::AdamW(OptimizerConfig config, std::vector<std::vector<ad::Parameter*>> groups)
    : config_(config), groups_(std::move(groups)) {
  config_.validate();
  std::set<const ad::Parameter*> seen;
  for (const auto& group : groups_) {
    for (const auto* p : group) {
      if (!seen.insert(p).second) {
        throw ConfigError("parameter '" + p->name + "' registered with the optimizer twice");
      }
    }
    moments_.emplace_back(group.size());
    learning_rates_.push_back(config_.learning_rate);
  }
}

void AdamW::set_learning_rate(std::size_t group, double lr) {
  if (group >= groups_.size()) throw ConfigError("optimizer has no parameter group " + std::to_string(group));
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  learning_rates_[group] = lr;
}

AdamW::AdamW(OptimizerConfig config, std::vector<ad::Parameter*> params)
    : AdamW(config, std::vector<std::vector<ad::Parameter*>>{std::move(params)}) {}

void AdamW::step(const ad::GradientMap& grads) {
  ++step_;
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    std::vector<ad::Tensor> g;
    g.reserve(groups_[gi].size());
    double norm2 = 0.0;
    for (const auto* p : groups_[gi]) {
      g.push_back(grads[*p]);
      for (double x : g.back().values()) norm2 += x * x;
    }
    const double norm = std::sqrt(norm2);
    if (config_.clip_norm > 0.0 && norm > config_.clip_norm) {
      const double factor = config_.clip_norm / norm;
      for (auto& t : g) t *= factor;
    }
    OptimizerConfig c = config_;
    c.learning_rate = learning_rates_[gi];
    adamw_step(groups_[gi], g, moments_[gi], c, step_);
  }
}

}  // namespace lexda::training
