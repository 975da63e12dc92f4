#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexda/corpus/parsers.hpp"
#include "lexda/corpus/synthetic.hpp"
#include "lexda/model/cwi_model.hpp"
#include "lexda/training/trainer.hpp"

namespace lexda::app {

enum class CorpusFormat { complex, cwi2018, synthetic };

std::string_view to_string(CorpusFormat f);
CorpusFormat parse_format(std::string_view name);

struct DataConfig {
  CorpusFormat format = CorpusFormat::synthetic;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  /// BenchLS file; required by multitask-da.
  std::optional<std::string> simplification;
  corpus::CwiGrouping cwi_grouping = corpus::CwiGrouping::language;
  /// Seeded subsample of the training examples.
  std::optional<std::size_t> max_examples;
  /// Share of training examples split off for validation when no
  /// validation files are named.
  double validation_fraction = 0.0;
  corpus::SyntheticSpec synthetic;
};

/// Everything one run needs. `model.groups` is filled from the data at run
/// time and is not part of the file format.
struct RunConfig {
  std::uint64_t seed = 0;
  model::ModelConfig model;
  training::RunPlan plan;
  /// Unset means the variant default (12 for vae-da, 8 otherwise).
  std::optional<std::size_t> epochs;
  DataConfig data;

  std::size_t effective_epochs() const;
};

// File layout (JSON, nested objects):
//   seed, variant,
//   data.{format, train, validation, simplification, cwi_grouping,
//         max_examples, validation_fraction, synthetic.*},
//   model.{char_embedding, char_hidden, d_model, layers, heads, feed_forward,
//          pooling, head_hidden1, head_hidden2, z_dim, vae_hidden,
//          decoder_embedding, decoder_hidden, decoder_projection,
//          disc_hidden1, disc_hidden2, disc_activation, dropout,
//          max_chars, max_tokens},
//   training.{epochs, batch_size, loss, learning_rate, beta1, beta2, epsilon,
//             weight_decay, clip_norm, discriminator_learning_rate,
//             lambda_override, unlabeled_groups, simplification_ratio,
//             discriminator},
//   loss.{alpha_vae, alpha_dec, alpha_task, beta, gamma, ml_weight}
nlohmann::json to_json(const RunConfig& config);
/// Throws ConfigError on unknown keys, wrong types, or invalid values.
RunConfig config_from_json(const nlohmann::json& document);

/// Overlays `patch` on `base`. Every key of `patch` must already exist in
/// `base`; a null in `base` accepts any value.
void merge_strict(nlohmann::json& base, const nlohmann::json& patch, const std::string& where = "");

/// Applies "dotted.key=value". The value is read as JSON when it parses and
/// as a plain string otherwise.
void apply_override(nlohmann::json& document, std::string_view assignment);

/// Defaults, then the file, then the overrides, then the seed.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      std::span<const std::string> overrides,
                      std::optional<std::uint64_t> seed = std::nullopt);

/// Same layering on top of an existing document (e.g. the config stored in
/// a checkpoint).
RunConfig layer_config(nlohmann::json base, const std::optional<std::filesystem::path>& file,
                       std::span<const std::string> overrides,
                       std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace lexda::app
