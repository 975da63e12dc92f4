#include "lexda/eval/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include <spdlog/spdlog.h>

#include "lexda/error.hpp"
#include "lexda/text.hpp"

namespace lexda::eval {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> gold, const char* what) {
  if (pred.size() != gold.size()) {
    throw ContractError(std::string(what) + ": " + std::to_string(pred.size()) +
                        " predictions for " + std::to_string(gold.size()) + " gold values");
  }
  if (pred.empty()) throw ContractError(std::string(what) + " of empty input");
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ValidationError("not a number: '" + field + "'", line);
  }
  return v;
}

GroupMetrics score_group(std::string name, std::span<const double> pred,
                         std::span<const double> gold) {
  GroupMetrics m;
  m.group = std::move(name);
  m.count = pred.size();
  m.mae = mae(pred, gold);
  if (pred.size() < 2) {
    spdlog::info("group '{}' has {} example(s); Pearson omitted", m.group, pred.size());
    return m;
  }
  try {
    m.pearson = pearson(pred, gold);
  } catch (const UndefinedMetricError& e) {
    spdlog::info("group '{}': Pearson omitted ({})", m.group, e.what());
  }
  return m;
}

}  // namespace

double pearson(std::span<const double> pred, std::span<const double> gold) {
  check_pair(pred, gold, "pearson");
  if (pred.size() < 2) throw ContractError("pearson needs at least two points");
  const double n = static_cast<double>(pred.size());
  double mp = 0.0, mg = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mp += pred[i];
    mg += gold[i];
  }
  mp /= n;
  mg /= n;
  double cov = 0.0, vp = 0.0, vg = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double a = pred[i] - mp, b = gold[i] - mg;
    cov += a * b;
    vp += a * a;
    vg += b * b;
  }
  if (vp == 0.0 || vg == 0.0) {
    throw UndefinedMetricError("pearson correlation undefined for constant input");
  }
  return std::clamp(cov / std::sqrt(vp * vg), -1.0, 1.0);
}

double mae(std::span<const double> pred, std::span<const double> gold) {
  check_pair(pred, gold, "mae");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::abs(pred[i] - gold[i]);
  return total / static_cast<double>(pred.size());
}

std::size_t argmax(std::span<const double> row) {
  if (row.empty()) throw ContractError("argmax of an empty row");
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

double discriminator_accuracy(const ad::Tensor& logits, std::span<const std::size_t> labels) {
  const std::size_t rows = logits.rows(), cols = logits.cols();
  if (rows != labels.size()) throw ContractError("discriminator_accuracy: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    hits += argmax(logits.values().subspan(i * cols, cols)) == labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(rows);
}

double discriminator_accuracy(const std::vector<std::vector<double>>& logits,
                              std::span<const std::size_t> labels) {
  if (logits.size() != labels.size()) throw ContractError("discriminator_accuracy: length mismatch");
  if (logits.empty()) throw ContractError("discriminator_accuracy of empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) hits += argmax(logits[i]) == labels[i];
  return static_cast<double>(hits) / static_cast<double>(logits.size());
}

const GroupMetrics* MetricsTable::find(const std::string& group) const {
  if (group == kOverall) return &overall;
  for (const auto& g : groups) {
    if (g.group == group) return &g;
  }
  return nullptr;
}

MetricsTable score(std::span<const double> pred, std::span<const double> gold,
                   std::span<const std::string> groups) {
  check_pair(pred, gold, "score");
  if (groups.size() != pred.size()) throw ContractError("score: one group label per example");
  std::vector<double> clamped(pred.size());
  std::transform(pred.begin(), pred.end(), clamped.begin(),
                 [](double p) { return std::clamp(p, 0.0, 1.0); });
  MetricsTable table;
  table.overall = score_group(kOverall, clamped, gold);
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_group;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    auto& [p, g] = by_group[groups[i]];
    p.push_back(clamped[i]);
    g.push_back(gold[i]);
  }
  for (const auto& [name, pg] : by_group) table.groups.push_back(score_group(name, pg.first, pg.second));
  return table;
}

void write_metrics_table(std::ostream& out, const MetricsTable& table) {
  out << "group\tcount\tpearson\tmae\n";
  auto row = [&out](const GroupMetrics& m) {
    out << m.group << '\t' << m.count << '\t' << (m.pearson ? format_double(*m.pearson) : "NA")
        << '\t' << format_double(m.mae) << '\n';
  };
  row(table.overall);
  for (const auto& g : table.groups) row(g);
}

MetricsTable read_metrics_table(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  if (!std::getline(in, line) || line != "group\tcount\tpearson\tmae") {
    throw ValidationError("missing metrics table header", 1);
  }
  ++number;
  MetricsTable table;
  bool have_overall = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 4) throw ValidationError("expected 4 fields", number);
    GroupMetrics m;
    m.group = fields[0];
    const double count = parse_double(fields[1], number);
    if (count < 0 || count != std::floor(count)) throw ValidationError("bad count", number);
    m.count = static_cast<std::size_t>(count);
    if (fields[2] != "NA") m.pearson = parse_double(fields[2], number);
    m.mae = parse_double(fields[3], number);
    if (!have_overall) {
      if (m.group != kOverall) throw ValidationError("first row must be 'overall'", number);
      table.overall = std::move(m);
      have_overall = true;
    } else {
      table.groups.push_back(std::move(m));
    }
  }
  if (!have_overall) throw ValidationError("metrics table has no rows", number);
  return table;
}

}  // namespace lexda::eval
