#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexda/autodiff/tensor.hpp"

namespace lexda::eval {

/// Sample Pearson correlation. Throws ContractError for fewer than two
/// points or unequal lengths, UndefinedMetricError if either side is constant.
double pearson(std::span<const double> pred, std::span<const double> gold);

/// Mean absolute error. Throws ContractError on empty or unequal input.
double mae(std::span<const double> pred, std::span<const double> gold);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> row);

/// Fraction of rows of `logits` ([n x k]) whose argmax equals the label.
double discriminator_accuracy(const ad::Tensor& logits, std::span<const std::size_t> labels);
double discriminator_accuracy(const std::vector<std::vector<double>>& logits,
                              std::span<const std::size_t> labels);

struct GroupMetrics {
  std::string group;
  std::size_t count = 0;
  /// Absent for groups with fewer than two examples or constant values.
  std::optional<double> pearson;
  double mae = 0.0;
};

/// Overall row followed by one row per group in sorted order.
struct MetricsTable {
  GroupMetrics overall;
  std::vector<GroupMetrics> groups;

  const GroupMetrics* find(const std::string& group) const;
};

inline constexpr const char* kOverall = "overall";

/// Clamps predictions to [0, 1], then scores overall and per group. Missing
/// Pearson values are logged as notices.
MetricsTable score(std::span<const double> pred, std::span<const double> gold,
                   std::span<const std::string> groups);

/// Tab-separated "group count pearson mae" with a header; missing Pearson is "NA".
void write_metrics_table(std::ostream& out, const MetricsTable& table);
/// Inverse of write_metrics_table. Throws ValidationError with the line number.
MetricsTable read_metrics_table(std::istream& in);

}  // namespace lexda::eval
