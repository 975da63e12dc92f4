#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lexda/corpus/example.hpp"

namespace lexda::corpus {

/// Parameters of the synthetic multi-domain corpus.
///
/// Gold complexity depends only on the target word: its length and the
/// share of "rare" letters in it, plus Gaussian noise. Each domain draws
/// filler words from its own lexicon and owns one marker token. In the
/// first `source_domains` domains the marker appears exactly when the gold
/// score is above 0.5 with probability `spurious_strength` (otherwise it
/// appears by coin flip). In the remaining domains it appears with
/// probability `target_marker_rate`, independent of the label.
struct SyntheticSpec {
  std::size_t domains = 2;
  std::size_t per_domain = 100;
  /// Distinct target pseudo-words shared by all domains.
  std::size_t vocabulary = 200;
  /// Filler pseudo-words per domain.
  std::size_t fillers_per_domain = 40;
  double spurious_strength = 0.9;
  std::size_t source_domains = 1;
  double target_marker_rate = 0.0;
  double noise = 0.05;
  std::size_t min_fillers = 4;
  std::size_t max_fillers = 9;
};

/// Group label of domain i ("domain0", "domain1", ...).
std::string synthetic_domain_name(std::size_t i);
/// Marker token carried by domain i.
std::string synthetic_marker(std::size_t i);

/// Deterministic in (spec, seed). Examples are ordered domain by domain.
/// Throws ConfigError on an invalid spec.
std::vector<AnnotatedExample> gen_synthetic_domains(const SyntheticSpec& spec, std::uint64_t seed);

/// The noiseless score the generator assigns to a target word.
double synthetic_complexity(const std::string& word);

}  // namespace lexda::corpus
