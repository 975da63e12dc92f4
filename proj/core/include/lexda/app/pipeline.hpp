#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lexda/app/config.hpp"
#include "lexda/corpus/batching.hpp"
#include "lexda/eval/report.hpp"
#include "lexda/nn/checkpoint.hpp"

namespace lexda::app {

/// Reads and concatenates corpus files. Throws ValidationError on bad rows
/// and ConfigError when no file is named.
std::vector<corpus::AnnotatedExample> load_corpus(CorpusFormat format,
                                                  std::span<const std::string> paths,
                                                  corpus::CwiGrouping grouping);

struct RunData {
  std::vector<corpus::AnnotatedExample> train;
  std::vector<corpus::AnnotatedExample> validation;
  std::vector<corpus::SimplificationExample> simplification;
};

/// Training and validation examples as the config describes them,
/// including the seeded subsample and validation split.
RunData load_run_data(const RunConfig& config);

/// Group labels for the discriminator of `variant`: the training groups, or
/// the two task names for multitask-da.
std::vector<std::string> discriminator_groups(model::Variant variant,
                                              const std::vector<corpus::AnnotatedExample>& train);

/// A model with its vocabularies and label set.
struct ModelBundle {
  RunConfig config;
  corpus::Vocabularies vocab;
  corpus::LabelSet labels;
  std::unique_ptr<model::CwiModel> model;

  std::vector<corpus::EncodedExample> encode(const std::vector<corpus::AnnotatedExample>& examples) const;
};

ModelBundle build_model(const RunConfig& config, const RunData& data);

struct TrainedRun {
  ModelBundle bundle;
  eval::TrainingReport report;
};

TrainedRun train(const RunConfig& config, const RunData& data,
                 const training::EpochCallback& on_epoch = {});

/// Parameters plus the effective config, vocabularies and groups.
nn::Checkpoint make_checkpoint(const ModelBundle& bundle);

/// The config document stored in a checkpoint. Throws CheckpointError when
/// it is absent.
nlohmann::json stored_config(const nn::Checkpoint& checkpoint);

/// Rebuilds the model described by `config` with the checkpoint's
/// vocabularies and groups, then loads the tensors. Throws CheckpointError
/// when shapes disagree.
ModelBundle restore_model(const RunConfig& config, const nn::Checkpoint& checkpoint);

/// Eval-mode complexity of the target at code-point span [start, end) of
/// `sentence`, clamped to [0, 1]. Throws ContractError when the span is out
/// of range or (if given) does not slice out `expected`.
double predict_span(const ModelBundle& bundle, const std::string& sentence, std::size_t start,
                    std::size_t end, const std::optional<std::string>& expected = std::nullopt);

}  // namespace lexda::app
