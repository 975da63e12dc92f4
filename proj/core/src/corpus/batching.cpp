#include "lexda/corpus/batching.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "lexda/error.hpp"
#include "lexda/random.hpp"
#include "lexda/text.hpp"

namespace lexda::corpus {

namespace {

void collect(const std::string& sentence, std::set<char32_t>& chars, std::set<std::string>& tokens) {
  for (char32_t c : text::decode_utf8(sentence)) chars.insert(c);
  for (auto& t : text::tokenize(sentence)) tokens.insert(std::move(t));
}

Vocabularies finish(const std::set<char32_t>& chars, const std::set<std::string>& tokens) {
  return Vocabularies{nn::CharVocabulary::from_characters(chars),
                      nn::TokenVocabulary::from_tokens(tokens)};
}

}  // namespace

Vocabularies build_vocabularies(const std::vector<AnnotatedExample>& examples) {
  return build_vocabularies(examples, {});
}

Vocabularies build_vocabularies(const std::vector<AnnotatedExample>& examples,
                                const std::vector<SimplificationExample>& simplification) {
  if (examples.empty() && simplification.empty()) {
    throw ContractError("build_vocabularies: no examples");
  }
  std::set<char32_t> chars;
  std::set<std::string> tokens;
  for (const auto& ex : examples) {
    collect(ex.sentence, chars, tokens);
    for (char32_t c : text::decode_utf8(ex.target.surface)) chars.insert(c);
  }
  for (const auto& ex : simplification) {
    collect(ex.sentence, chars, tokens);
    for (const auto& c : ex.candidates) collect(c, chars, tokens);
  }
  return finish(chars, tokens);
}

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size()) throw ConfigError("duplicate label in label set");
}

LabelSet LabelSet::from_examples(const std::vector<AnnotatedExample>& examples) {
  std::set<std::string> groups;
  for (const auto& ex : examples) groups.insert(ex.group);
  return LabelSet(std::vector<std::string>(groups.begin(), groups.end()));
}

int LabelSet::index(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

EncodedExample encode(const AnnotatedExample& example, const Vocabularies& vocab,
                      const LabelSet& labels, const SequenceLimits& limits) {
  EncodedExample out;
  out.chars = vocab.chars.encode(text::decode_utf8(example.target.surface));
  if (out.chars.size() > limits.max_chars) {
    spdlog::warn("target '{}' of example '{}' truncated to {} characters", example.target.surface,
                 example.id, limits.max_chars);
    out.chars.resize(limits.max_chars);
  }
  if (out.chars.empty()) throw ContractError("example '" + example.id + "' has an empty target");
  out.tokens.push_back(nn::TokenVocabulary::cls);
  const auto ids = vocab.tokens.encode(text::tokenize(example.sentence));
  out.tokens.insert(out.tokens.end(), ids.begin(), ids.end());
  if (out.tokens.size() > limits.max_tokens) {
    spdlog::warn("sentence of example '{}' truncated to {} tokens", example.id, limits.max_tokens);
    out.tokens.resize(limits.max_tokens);
  }
  out.group = labels.index(example.group);
  out.gold = example.gold_complexity;
  return out;
}

EncodedSimplification encode(const SimplificationExample& example, const Vocabularies& vocab,
                             const SequenceLimits& limits) {
  EncodedSimplification out;
  const auto words = text::split_whitespace(example.sentence);
  if (example.position >= words.size()) {
    throw ContractError("simplification position " + std::to_string(example.position) +
                        " outside sentence");
  }
  std::string before;
  for (std::size_t i = 0; i < example.position; ++i) before += words[i] + ' ';
  out.position = 1 + text::tokenize(before).size();
  out.tokens.push_back(nn::TokenVocabulary::cls);
  const auto ids = vocab.tokens.encode(text::tokenize(example.sentence));
  out.tokens.insert(out.tokens.end(), ids.begin(), ids.end());
  if (out.tokens.size() > limits.max_tokens) {
    spdlog::warn("simplification sentence truncated to {} tokens", limits.max_tokens);
    out.tokens.resize(limits.max_tokens);
  }
  if (out.position >= out.tokens.size()) {
    throw ContractError("simplification target lies beyond the token limit");
  }
  out.chars = vocab.chars.encode(text::decode_utf8(example.target));
  if (out.chars.size() > limits.max_chars) out.chars.resize(limits.max_chars);
  if (out.chars.empty()) throw ContractError("simplification example has an empty target");
  const auto answer = text::tokenize(example.candidates.at(0));
  out.answer = answer.empty() ? nn::TokenVocabulary::unknown : vocab.tokens.index(answer.front());
  return out;
}

std::span<const int> Batch::char_row(std::size_t i) const {
  return {chars.data() + i * char_len, char_length(i)};
}

std::span<const int> Batch::token_row(std::size_t i) const {
  return {tokens.data() + i * token_len, token_length(i)};
}

std::size_t Batch::char_length(std::size_t i) const {
  std::size_t n = 0;
  while (n < char_len && char_mask[i * char_len + n]) ++n;
  return n;
}

std::size_t Batch::token_length(std::size_t i) const {
  std::size_t n = 0;
  while (n < token_len && token_mask[i * token_len + n]) ++n;
  return n;
}

Batch make_batch(const std::vector<EncodedExample>& encoded, std::span<const std::size_t> rows) {
  Batch b;
  b.size = rows.size();
  for (auto r : rows) {
    b.char_len = std::max(b.char_len, encoded[r].chars.size());
    b.token_len = std::max(b.token_len, encoded[r].tokens.size());
  }
  b.chars.assign(b.size * b.char_len, nn::CharVocabulary::padding);
  b.char_mask.assign(b.size * b.char_len, false);
  b.tokens.assign(b.size * b.token_len, nn::TokenVocabulary::padding);
  b.token_mask.assign(b.size * b.token_len, false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& ex = encoded[rows[i]];
    for (std::size_t j = 0; j < ex.chars.size(); ++j) {
      b.chars[i * b.char_len + j] = ex.chars[j];
      b.char_mask[i * b.char_len + j] = true;
    }
    for (std::size_t j = 0; j < ex.tokens.size(); ++j) {
      b.tokens[i * b.token_len + j] = ex.tokens[j];
      b.token_mask[i * b.token_len + j] = true;
    }
    b.groups.push_back(ex.group);
    b.gold.push_back(ex.gold);
    b.source.push_back(rows[i]);
  }
  return b;
}

std::vector<Batch> make_batches(const std::vector<EncodedExample>& encoded, std::size_t batch_size,
                                std::uint64_t seed) {
  if (batch_size == 0) throw ContractError("make_batches: batch size must be at least 1");
  std::vector<std::size_t> order(encoded.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = derive_rng(seed, "batches");
  shuffle(order.begin(), order.end(), rng);
  std::vector<Batch> out;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    out.push_back(make_batch(encoded, std::span<const std::size_t>(order.data() + start, end - start)));
  }
  return out;
}

std::vector<Batch> make_batches(const std::vector<AnnotatedExample>& examples,
                                const Vocabularies& vocab, const LabelSet& labels,
                                std::size_t batch_size, std::uint64_t seed,
                                const SequenceLimits& limits) {
  std::vector<EncodedExample> encoded;
  encoded.reserve(examples.size());
  for (const auto& ex : examples) encoded.push_back(encode(ex, vocab, labels, limits));
  return make_batches(encoded, batch_size, seed);
}

}  // namespace lexda::corpus
