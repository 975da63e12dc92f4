#include "lexda/nn/vocabulary.hpp"

#include <algorithm>
#include <array>

#include "lexda/error.hpp"

namespace lexda::nn {

namespace {

const std::array<std::string, TokenVocabulary::reserved> kReservedTokens = {"<pad>", "<unk>",
                                                                           "<mask>", "<cls>"};

}  // namespace

void CharVocabulary::finalize() {
  std::sort(pending_.begin(), pending_.end());
  pending_.erase(std::unique(pending_.begin(), pending_.end()), pending_.end());
  chars_ = std::move(pending_);
  pending_.clear();
  index_.clear();
  for (std::size_t i = 0; i < chars_.size(); ++i) index_[chars_[i]] = static_cast<int>(i) + reserved;
}

int CharVocabulary::index(char32_t c) const {
  const auto it = index_.find(c);
  return it == index_.end() ? unknown : it->second;
}

char32_t CharVocabulary::character(int index) const {
  if (index < reserved || static_cast<std::size_t>(index) >= size()) {
    throw VocabularyError("character index " + std::to_string(index) + " has no surface form");
  }
  return chars_[static_cast<std::size_t>(index - reserved)];
}

std::vector<int> CharVocabulary::encode(std::u32string_view chars) const {
  std::vector<int> out;
  out.reserve(chars.size());
  for (char32_t c : chars) out.push_back(index(c));
  return out;
}

void TokenVocabulary::finalize() {
  std::sort(pending_.begin(), pending_.end());
  pending_.erase(std::unique(pending_.begin(), pending_.end()), pending_.end());
  tokens_ = std::move(pending_);
  pending_.clear();
  index_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = static_cast<int>(i) + reserved;
}

int TokenVocabulary::index(std::string_view token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? unknown : it->second;
}

const std::string& TokenVocabulary::token(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= size()) {
    throw VocabularyError("token index " + std::to_string(index) + " outside vocabulary of " +
                          std::to_string(size()));
  }
  if (index < reserved) return kReservedTokens[static_cast<std::size_t>(index)];
  return tokens_[static_cast<std::size_t>(index - reserved)];
}

std::vector<int> TokenVocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(index(t));
  return out;
}

}  // namespace lexda::nn
