#include "lexda/corpus/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string_view>

#include "lexda/error.hpp"
#include "lexda/random.hpp"

namespace lexda::corpus {

namespace {

constexpr std::string_view kCommonLetters = "abdefghilmnoprstu";
constexpr std::string_view kRareLetters = "jkqvwxyz";
constexpr std::string_view kConsonants = "bdfglmnprst";
constexpr std::string_view kVowels = "aeiou";

bool is_rare(char c) { return kRareLetters.find(c) != std::string_view::npos; }

std::string target_word(Rng& rng) {
  const std::size_t len = 3 + uniform_index(rng, 10);  // 3..12
  const double rare_share = uniform(rng, 0.0, 0.6);
  std::string w;
  for (std::size_t i = 0; i < len; ++i) {
    const auto& pool = uniform01(rng) < rare_share ? kRareLetters : kCommonLetters;
    w.push_back(pool[uniform_index(rng, pool.size())]);
  }
  return w;
}

std::string filler_word(Rng& rng) {
  const std::size_t syllables = 2 + uniform_index(rng, 2);
  std::string w;
  for (std::size_t s = 0; s < syllables; ++s) {
    w.push_back(kConsonants[uniform_index(rng, kConsonants.size())]);
    w.push_back(kVowels[uniform_index(rng, kVowels.size())]);
  }
  return w;
}

}  // namespace

std::string synthetic_domain_name(std::size_t i) { return "domain" + std::to_string(i); }

std::string synthetic_marker(std::size_t i) { return "mrk" + std::to_string(i); }

double synthetic_complexity(const std::string& word) {
  const double len = static_cast<double>(word.size());
  const double rare = static_cast<double>(std::count_if(word.begin(), word.end(), is_rare));
  return std::clamp(0.1 + 0.4 * (len - 3.0) / 9.0 + 0.5 * rare / len, 0.0, 1.0);
}

std::vector<AnnotatedExample> gen_synthetic_domains(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.domains == 0) throw ConfigError("synthetic corpus needs at least one domain");
  if (spec.per_domain == 0) throw ConfigError("synthetic corpus needs examples per domain");
  if (spec.vocabulary == 0 || spec.fillers_per_domain == 0) {
    throw ConfigError("synthetic corpus needs non-empty target and filler vocabularies");
  }
  if (spec.source_domains > spec.domains) {
    throw ConfigError("more source domains than domains");
  }
  if (!(spec.spurious_strength >= 0.0 && spec.spurious_strength <= 1.0)) {
    throw ConfigError("spurious_strength must lie in [0, 1]");
  }
  if (!(spec.target_marker_rate >= 0.0 && spec.target_marker_rate <= 1.0)) {
    throw ConfigError("target_marker_rate must lie in [0, 1]");
  }
  if (spec.noise < 0.0) throw ConfigError("noise must be non-negative");
  if (spec.min_fillers == 0 || spec.min_fillers > spec.max_fillers) {
    throw ConfigError("invalid filler count range");
  }

  Rng lexicon_rng = derive_rng(seed, "synthetic/lexicon");
  std::vector<std::vector<std::string>> fillers(spec.domains);
  std::set<std::string> taken;
  for (std::size_t d = 0; d < spec.domains; ++d) {
    while (fillers[d].size() < spec.fillers_per_domain) {
      auto w = filler_word(lexicon_rng);
      if (taken.insert(w).second) fillers[d].push_back(std::move(w));
    }
  }
  std::vector<std::string> targets;
  std::size_t attempts = 0;
  while (targets.size() < spec.vocabulary) {
    if (++attempts > 100 * spec.vocabulary) throw ConfigError("cannot draw enough distinct target words");
    auto w = target_word(lexicon_rng);
    if (w.rfind("mrk", 0) == 0) continue;
    if (taken.insert(w).second) targets.push_back(std::move(w));
  }

  Rng rng = derive_rng(seed, "synthetic/examples");
  std::vector<AnnotatedExample> out;
  out.reserve(spec.domains * spec.per_domain);
  for (std::size_t d = 0; d < spec.domains; ++d) {
    const bool source = d < spec.source_domains;
    for (std::size_t k = 0; k < spec.per_domain; ++k) {
      const std::string& target = targets[uniform_index(rng, targets.size())];
      const double gold =
          std::clamp(synthetic_complexity(target) + spec.noise * standard_normal(rng), 0.0, 1.0);

      bool marker = uniform01(rng) < (source ? 0.5 : spec.target_marker_rate);
      if (source && uniform01(rng) < spec.spurious_strength) marker = gold > 0.5;

      const std::size_t count = spec.min_fillers + uniform_index(rng, spec.max_fillers - spec.min_fillers + 1);
      std::vector<std::string> words;
      for (std::size_t i = 0; i < count; ++i) {
        words.push_back(fillers[d][uniform_index(rng, fillers[d].size())]);
      }
      if (marker) words.insert(words.begin() + static_cast<long>(uniform_index(rng, words.size() + 1)),
                               synthetic_marker(d));
      const std::size_t target_at = uniform_index(rng, words.size() + 1);
      words.insert(words.begin() + static_cast<long>(target_at), target);

      AnnotatedExample ex;
      ex.id = "syn-" + std::to_string(d) + "-" + std::to_string(k);
      ex.group = synthetic_domain_name(d);
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) ex.sentence += ' ';
        if (i == target_at) ex.target.start = ex.sentence.size();
        ex.sentence += words[i];
      }
      ex.sentence += " .";
      ex.target.end = ex.target.start + target.size();
      ex.target.surface = target;
      ex.gold_complexity = gold;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace lexda::corpus
