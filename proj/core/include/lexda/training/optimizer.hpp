#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lexda/autodiff/graph.hpp"

namespace lexda::training {

/// Adversarial weight lambda = 2 / (1 + exp(-gamma * epoch)) - 1.
/// Throws ConfigError for gamma <= 0.
double lambda_schedule(std::size_t epoch, double gamma);

/// Epoch counter (completed epochs, starting at 0) and the matching lambda.
struct ScheduleState {
  std::size_t epoch = 0;
  double lambda = 0.0;
  double gamma = 0.1;

  explicit ScheduleState(double gamma = 0.1);
  void advance();
};

struct OptimizerConfig {
  double learning_rate = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  /// Global-norm clipping threshold per parameter group; 0 disables.
  double clip_norm = 5.0;

  /// Throws ConfigError on lr <= 0, betas outside [0, 1), eps <= 0,
  /// negative weight decay or clip norm.
  void validate() const;
};

/// First and second moments of one parameter.
struct AdamMoments {
  ad::Tensor m;
  ad::Tensor v;
};

/// One AdamW update of `params` in place, step counted from 1:
///   theta -= lr * (wd * theta + m_hat / (sqrt(v_hat) + eps)).
/// Throws ContractError for step <= 0 or misaligned arguments.
void adamw_step(std::span<ad::Parameter* const> params, std::span<const ad::Tensor> grads,
                std::span<AdamMoments> moments, const OptimizerConfig& config, long step);

/// Stateful AdamW over parameter groups. Gradients are clipped to
/// config.clip_norm by the global norm of each group separately.
class AdamW {
 public:
  AdamW(OptimizerConfig config, std::vector<std::vector<ad::Parameter*>> groups);
  AdamW(OptimizerConfig config, std::vector<ad::Parameter*> params);

  void step(const ad::GradientMap& grads);
  /// Overrides the learning rate of one group. Throws ConfigError for
  /// lr <= 0 or an unknown group.
  void set_learning_rate(std::size_t group, double lr);
  long steps() const noexcept { return step_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  OptimizerConfig config_;
  std::vector<std::vector<ad::Parameter*>> groups_;
  std::vector<std::vector<AdamMoments>> moments_;
  std::vector<double> learning_rates_;
  long step_ = 0;
};

}  // namespace lexda::training
