#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "lexda/model/cwi_model.hpp"

namespace lexda::training {

struct ProbeOptions {
  std::size_t steps = 600;
  std::size_t batch_size = 32;
  double learning_rate = 1e-2;
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 32;
  /// Share of examples held out for scoring.
  double holdout = 0.5;
  std::uint64_t seed = 0;
};

struct ProbeResult {
  double train_accuracy = 0.0;
  double heldout_accuracy = 0.0;
};

/// Fits a fresh group classifier on frozen eval-mode features of `model`
/// (examples' group indices are the labels) and reports its accuracy.
/// Throws ConfigError for fewer than two groups or an empty split.
ProbeResult probe_discriminator(const model::CwiModel& model,
                                std::span<const corpus::EncodedExample> examples,
                                std::size_t groups, const ProbeOptions& options = {});

}  // namespace lexda::training
