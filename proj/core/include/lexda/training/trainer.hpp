#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexda/eval/report.hpp"
#include "lexda/model/losses.hpp"
#include "lexda/training/optimizer.hpp"

namespace lexda::training {

enum class DiscriminatorKind { domain, language, task };

struct RunPlan {
  std::size_t epochs = 8;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  model::RegressionKind loss = model::RegressionKind::l1;
  model::LossWeights weights;
  OptimizerConfig optimizer;
  /// Learning rate of the discriminator parameters; defaults to the
  /// optimizer's.
  std::optional<double> discriminator_learning_rate;
  DiscriminatorKind discriminator = DiscriminatorKind::domain;
  /// Freezes lambda (0 gives the non-adversarial control).
  std::optional<double> lambda_override;
  /// Groups whose examples train only the discriminator (no gold used).
  std::vector<std::string> unlabeled_groups;
  /// Multitask: E2 batch size relative to E1 (1.0 = equal sizes).
  double simplification_ratio = 1.0;

  /// 12 for vae-da, 8 otherwise.
  static std::size_t default_epochs(model::Variant variant);
  /// Throws ConfigError on zero epochs or batch size, or invalid weights.
  void validate() const;
};

/// Called after each epoch with the record just appended.
using EpochCallback = std::function<void(const eval::EpochRecord&)>;

/// Epoch loop: lambda from the schedule (epoch counted from 0), seeded
/// shuffling, variant loss, backward, AdamW. Discriminator accuracy is
/// measured on the training batches before each update. Validation metrics
/// are computed in eval mode when `validation` is non-empty.
/// Throws ConfigError when an adversarial variant sees fewer than two groups.
eval::TrainingReport train_single_task(model::CwiModel& model,
                                       std::span<const corpus::EncodedExample> train,
                                       const RunPlan& plan,
                                       std::span<const corpus::EncodedExample> validation = {},
                                       const EpochCallback& on_epoch = {});

/// Alternates one lexical-complexity batch (E1) and one simplification
/// batch (E2); the task discriminator sees both batches' features labeled
/// by task of origin. Each step appends a BatchRecord with "regression",
/// "mlm", "task" and "objective".
/// Throws ConfigError on an empty simplification corpus or a model that is
/// not multitask-da.
eval::TrainingReport train_multitask(model::CwiModel& model,
                                     std::span<const corpus::EncodedExample> cwi,
                                     std::span<const corpus::EncodedSimplification> simplification,
                                     const RunPlan& plan,
                                     std::span<const corpus::EncodedExample> validation = {},
                                     const EpochCallback& on_epoch = {});

}  // namespace lexda::training
