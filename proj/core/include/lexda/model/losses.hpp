#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "lexda/model/cwi_model.hpp"

namespace lexda::model {

enum class RegressionKind { l1, mse };

/// Mean absolute (l1) or mean squared (mse) residual. pred is [B] or [B x 1].
/// Throws ContractError on an empty batch, DimensionError on length mismatch.
Var regression_loss(Var pred, std::span<const double> gold, RegressionKind kind);
double regression_loss(std::span<const double> pred, std::span<const double> gold,
                       RegressionKind kind);

/// Batch mean of -log softmax(logits)[label]. logits is [B x K] or [K].
/// Throws ContractError for a label outside [0, K).
Var cross_entropy(Var logits, std::span<const std::size_t> labels);

/// 1/2 * sum(mu^2 + exp(log_var) - 1 - log_var). NumericError on a
/// non-finite log_var.
Var kl_divergence(Var mu, Var log_var);
/// KL term plus 1/2 * ||x - reconstruction||^2.
Var vae_loss(const VaeState& state, Var x);

/// Summed weighted NLL over positions; targets equal to ignore_index add 0.
/// class_weights defaults to all ones. Throws VocabularyError for a target
/// outside the logits width.
Var decoder_loss(Var logits, std::span<const int> targets, int ignore_index,
                 std::span<const double> class_weights = {});

struct LossWeights {
  double alpha_vae = 0.1;
  double alpha_dec = 0.01;
  double alpha_task = 0.01;
  double beta = 0.2;
  double gamma = 0.1;
  /// Weight of the masked-word loss in the multitask objective.
  double ml_weight = 1.0;

  /// Throws ConfigError on a negative weight or non-positive gamma.
  void validate() const;
};

/// Loss terms of one step. `discriminator` is the domain/language
/// discriminator loss; `task` the task discriminator loss of multitask-da.
template <typename T>
struct LossParts {
  std::optional<T> regression;
  std::optional<T> discriminator;
  std::optional<T> vae;
  std::optional<T> decoder;
  std::optional<T> mlm;
  std::optional<T> task;
};

/// The variant's objective as written with the adversarial sign:
///   base          L_r
///   base-da       L_r - beta*lambda*L_d
///   vae-da        L_r - beta*lambda*L_d + alpha_vae*L_v
///   decoder-da    L_r - beta*lambda*L_d + alpha_dec*L_dec
///   multitask-da  L_r + ml_weight*L_ML - alpha_task*beta*lambda*L_task
/// Throws ConfigError when a term the variant needs is missing.
double compose_loss(const LossParts<double>& parts, const LossWeights& weights, double lambda,
                    Variant variant);

/// The quantity actually differentiated. Discriminator terms enter with
/// +1 (+alpha_task) because the beta*lambda reversal sits in front of the
/// discriminator, so shared parameters see the gradient of compose_loss and
/// discriminator parameters descend their own loss.
Var training_loss(const LossParts<Var>& parts, const LossWeights& weights, Variant variant);

}  // namespace lexda::model
