#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexda/eval/metrics.hpp"

namespace lexda::eval {

/// Loss terms by name: "regression", "discriminator", "vae", "decoder",
/// "mlm", "task", and "objective" (the composed value).
using LossMap = std::map<std::string, double>;

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double lambda = 0.0;
  /// Batch means of each loss term.
  LossMap losses;
  std::optional<double> train_pearson;
  std::optional<double> train_mae;
  std::optional<double> val_pearson;
  std::optional<double> val_mae;
  std::optional<double> discriminator_accuracy;
};

struct BatchRecord {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  LossMap losses;
};

struct TrainingReport {
  std::string variant;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  /// Kept in memory only; not serialized.
  std::vector<BatchRecord> batches;
  std::optional<MetricsTable> final_metrics;

  /// Throws ContractError unless record.epoch == epochs.size() + 1 and every
  /// value is finite.
  void append(EpochRecord record);
};

nlohmann::json to_json(const EpochRecord& record);
nlohmann::json to_json(const MetricsTable& table);
MetricsTable metrics_from_json(const nlohmann::json& j);

/// One {"type":"epoch"} line per epoch, then one {"type":"summary"} line.
void write_jsonl(std::ostream& out, const TrainingReport& report);
/// Throws ValidationError on malformed lines.
TrainingReport read_jsonl(std::istream& in);

}  // namespace lexda::eval
