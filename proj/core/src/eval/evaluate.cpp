#include "lexda/eval/evaluate.hpp"

#include "lexda/error.hpp"

namespace lexda::eval {

namespace {

model::ModelInput input_of(const corpus::EncodedExample& ex) { return {ex.chars, ex.tokens}; }

}  // namespace

std::vector<double> predict(const model::CwiModel& model,
                            std::span<const corpus::EncodedExample> examples) {
  std::vector<double> out;
  out.reserve(examples.size());
  Rng unused(0);
  for (const auto& ex : examples) {
    ad::Graph g(ad::GradMode::disabled);
    out.push_back(model.forward_regression(g, input_of(ex), ad::Mode::eval, unused).prediction.value().item());
  }
  return out;
}

ad::Tensor discriminator_logits(const model::CwiModel& model,
                                std::span<const corpus::EncodedExample> examples) {
  if (examples.empty()) throw ContractError("discriminator_logits of an empty corpus");
  const std::size_t k = model.config().groups.size();
  ad::Tensor out = ad::Tensor::zeros({examples.size(), k});
  Rng unused(0);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    ad::Graph g(ad::GradMode::disabled);
    const auto features = model.extract(g, input_of(examples[i]), ad::Mode::eval, unused);
    const auto logits = model.discriminate(g, features.concat, 0.0).value().values();
    std::copy(logits.begin(), logits.end(), out.values().begin() + static_cast<long>(i * k));
  }
  return out;
}

MetricsTable evaluate(const model::CwiModel& model, std::span<const corpus::EncodedExample> examples,
                      std::span<const std::string> groups) {
  const auto pred = predict(model, examples);
  std::vector<double> gold;
  gold.reserve(examples.size());
  for (const auto& ex : examples) gold.push_back(ex.gold);
  return score(pred, gold, groups);
}

}  // namespace lexda::eval
