#include "lexda/nn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "lexda/error.hpp"

namespace lexda::nn {

Checkpoint capture(const ParameterStore& store, nlohmann::json metadata) {
  Checkpoint c;
  for (const ad::Parameter* p : store.all()) c.tensors.emplace(p->name, p->value);
  c.metadata = std::move(metadata);
  return c;
}

nlohmann::json to_json(const Checkpoint& checkpoint) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& [name, tensor] : checkpoint.tensors) {
    params.push_back({{"name", name},
                      {"shape", tensor.shape()},
                      {"values", std::vector<double>(tensor.values().begin(), tensor.values().end())}});
  }
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"metadata", checkpoint.metadata},
          {"parameters", std::move(params)}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& document) {
  try {
    if (document.at("format").get<std::string>() != kCheckpointFormat) {
      throw CheckpointError("not a lexda checkpoint");
    }
    if (document.at("version").get<int>() != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version " + document.at("version").dump());
    }
    Checkpoint c;
    c.metadata = document.value("metadata", nlohmann::json::object());
    for (const auto& entry : document.at("parameters")) {
      auto shape = entry.at("shape").get<ad::Shape>();
      auto values = entry.at("values").get<std::vector<double>>();
      c.tensors.emplace(entry.at("name").get<std::string>(),
                        ad::Tensor(std::move(shape), std::move(values)));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw CheckpointError(std::string("malformed checkpoint tensor: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << to_json(checkpoint).dump() << '\n';
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  nlohmann::json document;
  try {
    in >> document;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(document);
}

void restore(ParameterStore& store, const Checkpoint& checkpoint) {
  for (ad::Parameter* p : store.all()) {
    const auto it = checkpoint.tensors.find(p->name);
    if (it == checkpoint.tensors.end()) {
      throw CheckpointError("checkpoint lacks parameter '" + p->name + "'");
    }
    if (it->second.shape() != p->value.shape()) {
      throw CheckpointError("parameter '" + p->name + "' has shape " +
                            ad::shape_string(it->second.shape()) + " in the checkpoint but " +
                            ad::shape_string(p->value.shape()) + " in the model");
    }
  }
  if (checkpoint.tensors.size() != store.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(checkpoint.tensors.size()) +
                          " tensors, model has " + std::to_string(store.size()));
  }
  for (ad::Parameter* p : store.all()) p->value = checkpoint.tensors.at(p->name);
}

}  // namespace lexda::nn
