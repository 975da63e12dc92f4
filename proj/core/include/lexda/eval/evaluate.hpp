#pragma once

#include <span>
#include <string>
#include <vector>

#include "lexda/eval/metrics.hpp"
#include "lexda/model/cwi_model.hpp"

namespace lexda::eval {

/// Raw (unclamped) eval-mode predictions, one per example.
std::vector<double> predict(const model::CwiModel& model,
                            std::span<const corpus::EncodedExample> examples);

/// Discriminator logits [n x groups] in eval mode.
ad::Tensor discriminator_logits(const model::CwiModel& model,
                                std::span<const corpus::EncodedExample> examples);

/// Per-group Pearson/MAE table; `groups[i]` names the group of examples[i].
MetricsTable evaluate(const model::CwiModel& model, std::span<const corpus::EncodedExample> examples,
                      std::span<const std::string> groups);

}  // namespace lexda::eval
