#include "lexda/training/probe.hpp"

#include <cmath>
#include <numeric>

#include "lexda/error.hpp"
#include "lexda/eval/metrics.hpp"
#include "lexda/model/losses.hpp"
#include "lexda/training/optimizer.hpp"

namespace lexda::training {

namespace {

double accuracy(ad::Graph& g, const nn::MlpHead& head, const std::vector<ad::Tensor>& features,
                const std::vector<std::size_t>& labels, std::span<const std::size_t> rows) {
  std::vector<ad::Var> xs;
  std::vector<std::size_t> ys;
  for (auto r : rows) {
    xs.push_back(g.constant(features[r]));
    ys.push_back(labels[r]);
  }
  Rng unused(0);
  const auto logits = head(g, ad::concat_rows(xs), ad::Mode::eval, unused);
  return eval::discriminator_accuracy(logits.value(), ys);
}

// z-scores every feature column with the fit side's mean and spread, so an
// untrained encoder's tightly clustered outputs are still separable.
void standardize(std::vector<ad::Tensor>& features, std::span<const std::size_t> fit) {
  const std::size_t width = features.front().size();
  const double n = static_cast<double>(fit.size());
  for (std::size_t k = 0; k < width; ++k) {
    double mean = 0.0;
    for (auto r : fit) mean += features[r][k];
    mean /= n;
    double var = 0.0;
    for (auto r : fit) var += (features[r][k] - mean) * (features[r][k] - mean);
    const double sd = std::sqrt(var / n);
    const double scale = sd > 1e-12 ? 1.0 / sd : 0.0;
    for (auto& f : features) f[k] = (f[k] - mean) * scale;
  }
}

}  // namespace

ProbeResult probe_discriminator(const model::CwiModel& model,
                                std::span<const corpus::EncodedExample> examples,
                                std::size_t groups, const ProbeOptions& options) {
  if (groups < 2) throw ConfigError("a group probe needs at least 2 groups");
  if (!(options.holdout > 0.0 && options.holdout < 1.0)) throw ConfigError("holdout must lie in (0, 1)");
  std::vector<ad::Tensor> features;
  std::vector<std::size_t> labels;
  Rng unused(0);
  for (const auto& ex : examples) {
    if (ex.group < 0 || static_cast<std::size_t>(ex.group) >= groups) {
      throw ConfigError("probe example outside the label set");
    }
    ad::Graph g(ad::GradMode::disabled);
    features.push_back(model.extract(g, {ex.chars, ex.tokens}, ad::Mode::eval, unused).concat.value());
    labels.push_back(static_cast<std::size_t>(ex.group));
  }
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = derive_rng(options.seed, "probe");
  shuffle(order.begin(), order.end(), rng);
  const auto held = static_cast<std::size_t>(options.holdout * static_cast<double>(order.size()));
  const std::span<const std::size_t> heldout(order.data(), held);
  const std::span<const std::size_t> fit(order.data() + held, order.size() - held);
  if (heldout.empty() || fit.empty()) throw ConfigError("probe split leaves an empty side");
  standardize(features, fit);

  nn::ParameterStore store(options.seed);
  const auto head = nn::MlpHead::create(store, "probe", features.front().size(), options.hidden1,
                                        options.hidden2, groups, 0.0);
  OptimizerConfig config;
  config.learning_rate = options.learning_rate;
  AdamW optimizer(config, store.all());
  for (std::size_t step = 0; step < options.steps; ++step) {
    ad::Graph g;
    std::vector<ad::Var> xs;
    std::vector<std::size_t> ys;
    for (std::size_t b = 0; b < options.batch_size; ++b) {
      const auto r = fit[uniform_index(rng, fit.size())];
      xs.push_back(g.constant(features[r]));
      ys.push_back(labels[r]);
    }
    const auto logits = head(g, ad::concat_rows(xs), ad::Mode::train, rng);
    optimizer.step(g.backward(model::cross_entropy(logits, ys)));
  }
  ad::Graph g(ad::GradMode::disabled);
  return {accuracy(g, head, features, labels, fit), accuracy(g, head, features, labels, heldout)};
}

}  // namespace lexda::training
