#include "lexda/eval/report.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "lexda/error.hpp"

namespace lexda::eval {

namespace {

using nlohmann::json;

void check_finite(const std::optional<double>& v, const char* name) {
  if (v && !std::isfinite(*v)) throw ContractError(std::string("non-finite ") + name + " in report");
}

void put(json& j, const char* key, const std::optional<double>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

std::optional<double> get(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json metrics_row(const GroupMetrics& m) {
  json j{{"group", m.group}, {"count", m.count}, {"mae", m.mae}};
  put(j, "pearson", m.pearson);
  return j;
}

GroupMetrics metrics_row_from(const json& j) {
  GroupMetrics m;
  m.group = j.at("group").get<std::string>();
  m.count = j.at("count").get<std::size_t>();
  m.pearson = get(j, "pearson");
  m.mae = j.at("mae").get<double>();
  return m;
}

}  // namespace

void TrainingReport::append(EpochRecord record) {
  if (record.epoch != epochs.size() + 1) {
    throw ContractError("epoch " + std::to_string(record.epoch) + " appended out of order");
  }
  check_finite(record.lambda, "lambda");
  for (const auto& [name, value] : record.losses) check_finite(value, name.c_str());
  check_finite(record.train_pearson, "train_pearson");
  check_finite(record.train_mae, "train_mae");
  check_finite(record.val_pearson, "val_pearson");
  check_finite(record.val_mae, "val_mae");
  check_finite(record.discriminator_accuracy, "discriminator_accuracy");
  epochs.push_back(std::move(record));
}

json to_json(const EpochRecord& r) {
  json j{{"type", "epoch"}, {"epoch", r.epoch}, {"lambda", r.lambda}, {"losses", r.losses}};
  put(j, "train_pearson", r.train_pearson);
  put(j, "train_mae", r.train_mae);
  put(j, "val_pearson", r.val_pearson);
  put(j, "val_mae", r.val_mae);
  put(j, "discriminator_accuracy", r.discriminator_accuracy);
  return j;
}

json to_json(const MetricsTable& table) {
  json groups = json::array();
  for (const auto& g : table.groups) groups.push_back(metrics_row(g));
  return json{{"overall", metrics_row(table.overall)}, {"groups", groups}};
}

MetricsTable metrics_from_json(const json& j) {
  MetricsTable t;
  t.overall = metrics_row_from(j.at("overall"));
  for (const auto& g : j.at("groups")) t.groups.push_back(metrics_row_from(g));
  return t;
}

void write_jsonl(std::ostream& out, const TrainingReport& report) {
  for (const auto& e : report.epochs) out << to_json(e).dump() << '\n';
  json summary{{"type", "summary"},
               {"variant", report.variant},
               {"seed", report.seed},
               {"epochs", report.epochs.size()}};
  summary["final"] = report.final_metrics ? to_json(*report.final_metrics) : json(nullptr);
  out << summary.dump() << '\n';
}

TrainingReport read_jsonl(std::istream& in) {
  TrainingReport report;
  std::string line;
  std::size_t number = 0;
  bool summary = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "epoch") {
        EpochRecord r;
        r.epoch = j.at("epoch").get<std::size_t>();
        r.lambda = j.at("lambda").get<double>();
        r.losses = j.at("losses").get<LossMap>();
        r.train_pearson = get(j, "train_pearson");
        r.train_mae = get(j, "train_mae");
        r.val_pearson = get(j, "val_pearson");
        r.val_mae = get(j, "val_mae");
        r.discriminator_accuracy = get(j, "discriminator_accuracy");
        report.append(std::move(r));
      } else if (type == "summary") {
        report.variant = j.at("variant").get<std::string>();
        report.seed = j.at("seed").get<std::uint64_t>();
        if (!j.at("final").is_null()) report.final_metrics = metrics_from_json(j.at("final"));
        summary = true;
      } else {
        throw ValidationError("unknown record type '" + type + "'", number);
      }
    } catch (const json::exception& e) {
      throw ValidationError(e.what(), number);
    } catch (const ContractError& e) {
      throw ValidationError(e.what(), number);
    }
  }
  if (!summary) throw ValidationError("report has no summary line", number);
  return report;
}

}  // namespace lexda::eval
