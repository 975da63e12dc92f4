#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "lexda/corpus/synthetic.hpp"
#include "lexda/model/cwi_model.hpp"
#include "lexda/training/probe.hpp"
#include "lexda/training/trainer.hpp"

namespace lexda::app {

/// Two-domain shift experiment: base and base-da are trained on labeled
/// source examples (base-da also sees unlabeled target examples) and scored
/// on held-out target examples. A control copy of base-da with lambda fixed
/// at 0 is probed for domain information.
struct ShiftExperiment {
  corpus::SyntheticSpec corpus;
  /// The first `train_share` of each domain trains; the rest of the target
  /// domain is the test set.
  double train_share = 0.5;
  model::ModelConfig model;
  training::RunPlan plan;
  training::ProbeOptions probe;
};

/// The desk-scale setting used by the acceptance suite.
ShiftExperiment default_shift_experiment();

struct ShiftOutcome {
  std::uint64_t seed = 0;
  double base_target_mae = 0.0;
  double da_target_mae = 0.0;
  /// base-da's own discriminator, eval mode, on its training examples.
  double da_discriminator_accuracy = 0.0;
  /// Held-out accuracy of a fresh probe on the lambda = 0 control features.
  double control_probe_accuracy = 0.0;
  /// Same probe on the base-da features.
  double da_probe_accuracy = 0.0;
  double seconds = 0.0;

  bool da_wins() const { return da_target_mae < base_target_mae; }
};

ShiftOutcome run_shift_seed(const ShiftExperiment& experiment, std::uint64_t seed);

/// Tab-separated, one row per seed.
void write_shift_table(std::ostream& out, std::span<const ShiftOutcome> outcomes);

}  // namespace lexda::app
