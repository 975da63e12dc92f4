#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lexda::text {

/// Decodes UTF-8; malformed bytes become U+FFFD.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view chars);

/// Unicode canonical composition.
std::string nfc(std::string_view utf8);

/// Lowercased words and punctuation marks. Whitespace separates tokens and
/// every punctuation code point is a token of its own.
std::vector<std::string> tokenize(std::string_view utf8);

/// Splits on runs of ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view text);

/// Splits on a single delimiter, keeping empty fields.
std::vector<std::string> split(std::string_view text, char delimiter);

std::string_view trim(std::string_view text);

}  // namespace lexda::text
