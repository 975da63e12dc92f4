#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lexda::nn {

/// Character inventory for the target-word encoder. Index 0 pads, index 1
/// stands in for characters never seen while building.
class CharVocabulary {
 public:
  static constexpr int padding = 0;
  static constexpr int unknown = 1;
  static constexpr int reserved = 2;

  CharVocabulary() = default;
  /// Indices follow code-point order after the reserved slots.
  template <typename Range>
  static CharVocabulary from_characters(const Range& chars) {
    CharVocabulary v;
    for (char32_t c : chars) v.insert(c);
    v.finalize();
    return v;
  }

  int index(char32_t c) const;
  char32_t character(int index) const;
  std::vector<int> encode(std::u32string_view chars) const;
  std::size_t size() const noexcept { return reserved + chars_.size(); }

  const std::vector<char32_t>& characters() const noexcept { return chars_; }

  friend bool operator==(const CharVocabulary& a, const CharVocabulary& b) {
    return a.chars_ == b.chars_;
  }

 private:
  void insert(char32_t c) { pending_.push_back(c); }
  void finalize();

  std::vector<char32_t> pending_;
  std::vector<char32_t> chars_;
  std::map<char32_t, int> index_;
};

/// Word-level inventory for the context encoder. Reserved slots: padding 0,
/// unknown 1, mask 2, sentence-start 3. Corpus tokens only ever receive
/// indices past the reserved block; encoding raw text yields unknown at worst.
class TokenVocabulary {
 public:
  static constexpr int padding = 0;
  static constexpr int unknown = 1;
  static constexpr int mask = 2;
  static constexpr int cls = 3;
  static constexpr int reserved = 4;

  TokenVocabulary() = default;
  /// Indices follow byte-wise lexicographic order after the reserved slots.
  template <typename Range>
  static TokenVocabulary from_tokens(const Range& tokens) {
    TokenVocabulary v;
    for (const auto& t : tokens) v.pending_.emplace_back(t);
    v.finalize();
    return v;
  }

  int index(std::string_view token) const;
  const std::string& token(int index) const;
  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::size_t size() const noexcept { return reserved + tokens_.size(); }

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const TokenVocabulary& a, const TokenVocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  void finalize();

  std::vector<std::string> pending_;
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> index_;
};

}  // namespace lexda::nn
