#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "lexda/autodiff/tensor.hpp"
#include "lexda/nn/parameters.hpp"

namespace lexda::nn {

inline constexpr const char* kCheckpointFormat = "lexda-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// Parameter tensors by name plus free-form metadata (model config,
/// vocabularies). Stored as JSON; doubles are written in shortest
/// round-trip form, so save/load is lossless.
struct Checkpoint {
  std::map<std::string, ad::Tensor> tensors;
  nlohmann::json metadata = nlohmann::json::object();
};

Checkpoint capture(const ParameterStore& store, nlohmann::json metadata = nlohmann::json::object());

nlohmann::json to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& document);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Throws CheckpointError when the file is missing, unparsable, or of a
/// different format/version.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies tensors into the store. Every store parameter must be present
/// with an identical shape; otherwise CheckpointError names the first
/// offending parameter.
void restore(ParameterStore& store, const Checkpoint& checkpoint);

}  // namespace lexda::nn
