#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lexda/autodiff/ops.hpp"

namespace lexda::testing {

inline constexpr double kStep = 1e-5;
inline constexpr double kTolerance = 1e-4;

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;

  void merge(const GradcheckResult& other);
};

/// |a - n| / max(|a|, |n|, 1e-6).
double rel_error(double analytic, double numeric);

/// Rounding noise of a central difference at step h. Entries whose analytic
/// and numeric values differ by less than this count as exact (true zeros,
/// such as attention key biases, otherwise score pure noise / 1e-6).
double roundoff_bound(double f_up, double f_down, double h);

ad::Tensor random_tensor(Rng& rng, ad::Shape shape, double lo = -1.0, double hi = 1.0);
/// Entries with |x| in [margin, 1], random sign (keeps kinks of relu/abs away).
ad::Tensor away_from_zero(Rng& rng, ad::Shape shape, double margin = 0.1);

/// sum(out * W) for a fixed random W drawn from `seed`; turns any output
/// into a scalar with a generic upstream gradient.
ad::Var contract(ad::Graph& g, ad::Var out, std::uint64_t seed);

using InputFn = std::function<ad::Var(ad::Graph&, std::span<const ad::Var>)>;

/// Central differences of f (made scalar by `contract`) with respect to
/// every entry of every input, against the tape's gradient.
GradcheckResult check_inputs(const InputFn& f, const std::vector<ad::Tensor>& inputs,
                             std::uint64_t seed, double h = kStep);

using LossFn = std::function<ad::Var(ad::Graph&)>;

/// Central differences with respect to parameter entries; `per_tensor`
/// caps the number of entries sampled from each tensor (0 = all).
GradcheckResult check_parameters(std::span<ad::Parameter* const> params, const LossFn& loss,
                                 std::uint64_t seed, std::size_t per_tensor = 0, double h = kStep);

/// One named finite-difference case, runnable at any seed.
struct GradCase {
  std::string name;
  std::function<GradcheckResult(std::uint64_t seed)> run;
};

/// Every operation, layer and loss of the library.
const std::vector<GradCase>& gradcheck_cases();

}  // namespace lexda::testing
