#include "lexda/model/losses.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "lexda/error.hpp"

namespace lexda::model {

namespace {

void check_lengths(std::size_t pred, std::size_t gold) {
  if (gold == 0) throw ContractError("regression loss over an empty batch");
  if (pred != gold) {
    throw DimensionError("regression loss: " + std::to_string(pred) + " predictions for " +
                         std::to_string(gold) + " gold values");
  }
}

template <typename T>
const T& need(const std::optional<T>& part, const char* name, Variant variant) {
  if (!part) {
    throw ConfigError("variant " + std::string(to_string(variant)) + " needs the " + name +
                      " loss");
  }
  return *part;
}

}  // namespace

Var regression_loss(Var pred, std::span<const double> gold, RegressionKind kind) {
  check_lengths(pred.size(), gold.size());
  Graph& g = *pred.graph();
  const Var target = g.constant(ad::Tensor(pred.shape(), {gold.begin(), gold.end()}));
  const Var residual = pred - target;
  return ad::mean(kind == RegressionKind::l1 ? ad::abs(residual) : ad::square(residual));
}

double regression_loss(std::span<const double> pred, std::span<const double> gold,
                       RegressionKind kind) {
  check_lengths(pred.size(), gold.size());
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - gold[i];
    total += kind == RegressionKind::l1 ? std::abs(r) : r * r;
  }
  return total / static_cast<double>(pred.size());
}

Var cross_entropy(Var logits, std::span<const std::size_t> labels) {
  const std::size_t width = logits.value().cols();
  for (auto l : labels) {
    if (l >= width) {
      throw ContractError("label " + std::to_string(l) + " outside " + std::to_string(width) +
                          " classes");
    }
  }
  return -1.0 * ad::mean(ad::pick(ad::log_softmax(logits), labels));
}

Var kl_divergence(Var mu, Var log_var) {
  if (!log_var.value().all_finite()) throw NumericError("VAE log-variance is not finite");
  const Var terms = ad::square(mu) + ad::exp(log_var) - log_var;
  return 0.5 * ad::shift(ad::sum(terms), -static_cast<double>(mu.size()));
}

Var vae_loss(const VaeState& state, Var x) {
  const Var error = ad::sum(ad::square(x - state.reconstruction));
  return kl_divergence(state.mu, state.log_var) + 0.5 * error;
}

Var decoder_loss(Var logits, std::span<const int> targets, int ignore_index,
                 std::span<const double> class_weights) {
  const auto& lv = logits.value();
  const std::size_t rows = lv.rows(), width = lv.cols();
  if (targets.size() != rows) {
    throw DimensionError("decoder loss: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(rows) + " logit rows");
  }
  if (!class_weights.empty() && class_weights.size() != width) {
    throw DimensionError("decoder loss: class weight count differs from vocabulary size");
  }
  std::vector<std::size_t> picked(rows, 0);
  std::vector<double> weight(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (targets[i] == ignore_index) continue;
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= width) {
      throw VocabularyError("decoder target " + std::to_string(targets[i]) +
                            " outside vocabulary of " + std::to_string(width));
    }
    picked[i] = static_cast<std::size_t>(targets[i]);
    weight[i] = class_weights.empty() ? 1.0 : class_weights[picked[i]];
  }
  Graph& g = *logits.graph();
  const Var log_p = ad::pick(ad::log_softmax(logits), picked);
  return -1.0 * ad::sum(log_p * g.constant(ad::Tensor(log_p.shape(), std::move(weight))));
}

void LossWeights::validate() const {
  if (alpha_vae < 0 || alpha_dec < 0 || alpha_task < 0 || beta < 0 || ml_weight < 0) {
    throw ConfigError("loss weights must be non-negative");
  }
  if (!(gamma > 0)) throw ConfigError("gamma must be positive");
}

double compose_loss(const LossParts<double>& parts, const LossWeights& w, double lambda,
                    Variant variant) {
  const double r = need(parts.regression, "regression", variant);
  const double bl = w.beta * lambda;
  switch (variant) {
    case Variant::base:
      return r;
    case Variant::base_da:
      return r - bl * need(parts.discriminator, "discriminator", variant);
    case Variant::vae_da:
      return r - bl * need(parts.discriminator, "discriminator", variant) +
             w.alpha_vae * need(parts.vae, "VAE", variant);
    case Variant::decoder_da:
      return r - bl * need(parts.discriminator, "discriminator", variant) +
             w.alpha_dec * need(parts.decoder, "decoder", variant);
    case Variant::multitask_da:
      return r + w.ml_weight * need(parts.mlm, "masked-word", variant) -
             w.alpha_task * bl * need(parts.task, "task discriminator", variant);
  }
  throw ConfigError("unknown variant");
}

Var training_loss(const LossParts<Var>& parts, const LossWeights& w, Variant variant) {
  const Var r = need(parts.regression, "regression", variant);
  switch (variant) {
    case Variant::base:
      return r;
    case Variant::base_da:
      return r + need(parts.discriminator, "discriminator", variant);
    case Variant::vae_da:
      return r + need(parts.discriminator, "discriminator", variant) +
             w.alpha_vae * need(parts.vae, "VAE", variant);
    case Variant::decoder_da:
      return r + need(parts.discriminator, "discriminator", variant) +
             w.alpha_dec * need(parts.decoder, "decoder", variant);
    case Variant::multitask_da:
      return r + w.ml_weight * need(parts.mlm, "masked-word", variant) +
             w.alpha_task * need(parts.task, "task discriminator", variant);
  }
  throw ConfigError("unknown variant");
}

}  // namespace lexda::model
