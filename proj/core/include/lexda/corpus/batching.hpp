#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lexda/corpus/example.hpp"
#include "lexda/nn/vocabulary.hpp"

namespace lexda::corpus {

struct Vocabularies {
  nn::CharVocabulary chars;
  nn::TokenVocabulary tokens;
};

/// Characters of every sentence and target, tokens of every sentence.
/// Order-independent. Throws ContractError on an empty list.
Vocabularies build_vocabularies(const std::vector<AnnotatedExample>& examples);
/// Also covers the simplification sentences and their candidates.
Vocabularies build_vocabularies(const std::vector<AnnotatedExample>& examples,
                                const std::vector<SimplificationExample>& simplification);

struct SequenceLimits {
  std::size_t max_chars = 32;
  std::size_t max_tokens = 128;
};

/// Index form of one example: target characters and [cls] + sentence tokens,
/// both truncated to the limits.
struct EncodedExample {
  std::vector<int> chars;
  std::vector<int> tokens;
  int group = -1;
  double gold = 0.0;
};

/// Ordered label set for a discriminator; lookup of an unknown name gives -1.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> names);
  /// Sorted distinct groups of the examples.
  static LabelSet from_examples(const std::vector<AnnotatedExample>& examples);

  int index(const std::string& name) const;
  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
};

EncodedExample encode(const AnnotatedExample& example, const Vocabularies& vocab,
                      const LabelSet& labels, const SequenceLimits& limits);

/// Index form of a simplification example. `position` indexes `tokens`
/// (so it already counts the [cls] prefix); `answer` is the first token of
/// the best-ranked candidate.
struct EncodedSimplification {
  std::vector<int> chars;
  std::vector<int> tokens;
  std::size_t position = 0;
  int answer = 0;
};

/// Maps the whitespace position onto the tokenizer's output. Throws
/// ContractError when the target falls beyond max_tokens.
EncodedSimplification encode(const SimplificationExample& example, const Vocabularies& vocab,
                             const SequenceLimits& limits);

/// Padded, index-mapped examples. Matrices are row-major [size x len];
/// masks are true exactly on real (non-padding) cells.
struct Batch {
  std::size_t size = 0;
  std::size_t char_len = 0;
  std::size_t token_len = 0;
  std::vector<int> chars;
  std::vector<bool> char_mask;
  std::vector<int> tokens;
  std::vector<bool> token_mask;
  std::vector<int> groups;
  std::vector<double> gold;
  /// Position of each row in the source example list.
  std::vector<std::size_t> source;

  /// Real (unpadded) cells of row i.
  std::span<const int> char_row(std::size_t i) const;
  std::span<const int> token_row(std::size_t i) const;
  std::size_t char_length(std::size_t i) const;
  std::size_t token_length(std::size_t i) const;
};

Batch make_batch(const std::vector<EncodedExample>& encoded, std::span<const std::size_t> rows);

/// Shuffles with `seed`, then cuts consecutive batches; the last may be short.
std::vector<Batch> make_batches(const std::vector<EncodedExample>& encoded, std::size_t batch_size,
                                std::uint64_t seed);
/// Convenience overload encoding the examples first.
std::vector<Batch> make_batches(const std::vector<AnnotatedExample>& examples,
                                const Vocabularies& vocab, const LabelSet& labels,
                                std::size_t batch_size, std::uint64_t seed,
                                const SequenceLimits& limits = {});

}  // namespace lexda::corpus
