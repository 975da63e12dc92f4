#include "lexda/corpus/parsers.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unicode/uchar.h>

#include "lexda/error.hpp"
#include "lexda/text.hpp"

namespace lexda::corpus {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open corpus file " + path.string());
  return in;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

bool blank(const std::string& line) { return text::trim(line).empty(); }

double parse_double(std::string_view field, const char* what, std::size_t line) {
  field = text::trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ValidationError(std::string(what) + " '" + std::string(field) + "' is not a number", line);
  }
  return value;
}

long parse_integer(std::string_view field, const char* what, std::size_t line) {
  field = text::trim(field);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ValidationError(std::string(what) + " '" + std::string(field) + "' is not an integer", line);
  }
  return value;
}

std::u32string fold_case(std::u32string s) {
  for (char32_t& c : s) c = static_cast<char32_t>(u_foldCase(static_cast<UChar32>(c), U_FOLD_CASE_DEFAULT));
  return s;
}

bool word_char(char32_t c) { return u_isalnum(static_cast<UChar32>(c)); }

/// Position of `needle` in `hay`, preferring a match with word boundaries.
std::optional<std::size_t> locate(const std::u32string& hay, const std::u32string& needle) {
  std::optional<std::size_t> any;
  for (std::size_t pos = hay.find(needle); pos != std::u32string::npos;
       pos = hay.find(needle, pos + 1)) {
    const bool left = pos == 0 || !word_char(hay[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right = end == hay.size() || !word_char(hay[end]);
    if (left && right) return pos;
    if (!any) any = pos;
  }
  return any;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void validate(const AnnotatedExample& example, std::size_t line) {
  if (!(example.gold_complexity >= 0.0 && example.gold_complexity <= 1.0)) {
    throw ValidationError("complexity " + format_double(example.gold_complexity) +
                              " outside [0, 1] for example '" + example.id + "'",
                          line);
  }
  const std::u32string sentence = text::decode_utf8(example.sentence);
  const auto& span = example.target;
  if (span.start >= span.end || span.end > sentence.size()) {
    throw ValidationError("target span [" + std::to_string(span.start) + ", " +
                              std::to_string(span.end) + ") does not fit a sentence of " +
                              std::to_string(sentence.size()) + " characters",
                          line);
  }
  const std::string slice = text::encode_utf8(sentence.substr(span.start, span.end - span.start));
  if (slice != span.surface) {
    throw ValidationError("target span slices '" + slice + "' but the target is '" + span.surface + "'",
                          line);
  }
}

std::vector<AnnotatedExample> parse_complex_lcp(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return parse_complex_lcp(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.filename().string() + ": " + e.what(), e.line());
  }
}

std::vector<AnnotatedExample> parse_complex_lcp(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (!blank(line)) break;
  }
  if (line_no == 0 || blank(line)) throw ValidationError("empty CompLex file");
  {
    auto header = text::split(line, '\t');
    for (auto& h : header) {
      std::string t(text::trim(h));
      std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
      h = t;
    }
    if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
    const std::vector<std::string> expected{"id", "corpus", "sentence", "token", "complexity"};
    if (header.size() < expected.size() || !std::equal(expected.begin(), expected.end(), header.begin())) {
      throw ValidationError("CompLex header must start with id, corpus, sentence, token, complexity",
                            line_no);
    }
  }

  std::vector<AnnotatedExample> out;
  while (next_line(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() < 5) {
      throw ValidationError("expected 5 tab-separated fields, found " + std::to_string(fields.size()),
                            line_no);
    }
    AnnotatedExample ex;
    ex.id = std::string(text::trim(fields[0]));
    ex.group = std::string(text::trim(fields[1]));
    const std::string raw_sentence = fields[2];
    const std::string raw_token(text::trim(fields[3]));
    ex.gold_complexity = parse_double(fields[4], "complexity", line_no);
    if (raw_token.empty()) throw ValidationError("empty target token", line_no);

    ex.sentence = text::nfc(raw_sentence);
    const std::string token = text::nfc(raw_token);
    const std::u32string sentence = text::decode_utf8(ex.sentence);
    const std::u32string needle = text::decode_utf8(token);
    auto pos = locate(sentence, needle);
    if (!pos) pos = locate(fold_case(sentence), fold_case(needle));
    if (!pos) throw ValidationError("target '" + raw_token + "' does not occur in the sentence", line_no);
    ex.target.start = *pos;
    ex.target.end = *pos + needle.size();
    ex.target.surface = text::encode_utf8(sentence.substr(*pos, needle.size()));
    validate(ex, line_no);
    out.push_back(std::move(ex));
  }
  return out;
}

std::string cwi2018_group_from_filename(const std::filesystem::path& path, CwiGrouping grouping) {
  std::string stem = path.stem().string();
  std::transform(stem.begin(), stem.end(), stem.begin(), [](unsigned char c) { return std::tolower(c); });
  auto has = [&](const char* s) { return stem.find(s) != std::string::npos; };
  if (has("german")) return "de";
  if (has("spanish")) return "es";
  if (has("french")) return "fr";
  const char* sub = has("wikinews") ? "wikinews" : has("wikipedia") ? "wikipedia" : has("news") ? "news" : nullptr;
  if (sub || has("english")) {
    if (grouping == CwiGrouping::subcorpus && sub) return sub;
    return "en";
  }
  throw ConfigError("cannot infer the CWI 2018 language of '" + path.filename().string() +
                    "'; set the group explicitly");
}

std::vector<AnnotatedExample> parse_cwi2018(const std::filesystem::path& path,
                                            const CwiOptions& options) {
  const std::string group = options.group ? *options.group
                                          : cwi2018_group_from_filename(path, options.grouping);
  auto in = open_input(path);
  try {
    return parse_cwi2018(in, group);
  } catch (const ValidationError& e) {
    throw ValidationError(path.filename().string() + ": " + e.what(), e.line());
  }
}

std::vector<AnnotatedExample> parse_cwi2018(std::istream& in, const std::string& group) {
  std::vector<AnnotatedExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() < 11) {
      throw ValidationError("expected 11 tab-separated fields, found " + std::to_string(fields.size()),
                            line_no);
    }
    AnnotatedExample ex;
    ex.id = std::string(text::trim(fields[0]));
    ex.group = group;
    const long start = parse_integer(fields[2], "start offset", line_no);
    const long end = parse_integer(fields[3], "end offset", line_no);
    if (start < 0 || end <= start) {
      throw ValidationError("invalid offsets " + std::to_string(start) + ".." + std::to_string(end), line_no);
    }
    ex.annotators = AnnotatorCounts{
        static_cast<int>(parse_integer(fields[5], "native count", line_no)),
        static_cast<int>(parse_integer(fields[6], "non-native count", line_no)),
        static_cast<int>(parse_integer(fields[7], "native marked count", line_no)),
        static_cast<int>(parse_integer(fields[8], "non-native marked count", line_no))};
    ex.gold_complexity = parse_double(fields[10], "probabilistic label", line_no);

    // offsets refer to the raw sentence: validate there, then re-index after NFC
    const std::string& raw_sentence = fields[1];
    const std::string& raw_target = fields[4];
    AnnotatedExample raw = ex;
    raw.sentence = raw_sentence;
    raw.target = TargetSpan{static_cast<std::size_t>(start), static_cast<std::size_t>(end), raw_target};
    validate(raw, line_no);

    const std::u32string raw_chars = text::decode_utf8(raw_sentence);
    const std::string prefix = text::nfc(text::encode_utf8(raw_chars.substr(0, raw.target.start)));
    ex.sentence = text::nfc(raw_sentence);
    ex.target.surface = text::nfc(raw_target);
    ex.target.start = text::decode_utf8(prefix).size();
    ex.target.end = ex.target.start + text::decode_utf8(ex.target.surface).size();
    validate(ex, line_no);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<SimplificationExample> parse_benchls(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return parse_benchls(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.filename().string() + ": " + e.what(), e.line());
  }
}

std::vector<SimplificationExample> parse_benchls(std::istream& in) {
  std::vector<SimplificationExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() < 3) {
      throw ValidationError("expected sentence, target and position fields", line_no);
    }
    SimplificationExample ex;
    ex.sentence = text::nfc(fields[0]);
    ex.target = text::nfc(std::string(text::trim(fields[1])));
    const long position = parse_integer(fields[2], "token position", line_no);
    const auto tokens = text::split_whitespace(ex.sentence);
    if (position < 0 || static_cast<std::size_t>(position) >= tokens.size()) {
      throw ValidationError("token position " + std::to_string(position) + " outside a sentence of " +
                                std::to_string(tokens.size()) + " tokens",
                            line_no);
    }
    ex.position = static_cast<std::size_t>(position);

    std::vector<std::pair<long, std::string>> ranked;
    for (std::size_t k = 3; k < fields.size(); ++k) {
      const auto field = text::trim(fields[k]);
      if (field.empty()) continue;
      const auto colon = field.find(':');
      if (colon == std::string_view::npos || colon + 1 == field.size()) {
        throw ValidationError("candidate '" + std::string(field) + "' is not rank:word", line_no);
      }
      ranked.emplace_back(parse_integer(field.substr(0, colon), "candidate rank", line_no),
                          text::nfc(field.substr(colon + 1)));
    }
    if (ranked.empty()) throw ValidationError("row has no substitution candidates", line_no);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [rank, word] : ranked) ex.candidates.push_back(std::move(word));
    out.push_back(std::move(ex));
  }
  return out;
}

void write_complex_lcp(std::ostream& out, const std::vector<AnnotatedExample>& examples) {
  out << "id\tcorpus\tsentence\ttoken\tcomplexity\n";
  for (const auto& ex : examples) {
    out << ex.id << '\t' << ex.group << '\t' << ex.sentence << '\t' << ex.target.surface << '\t'
        << format_double(ex.gold_complexity) << '\n';
  }
}

void write_complex_lcp(const std::filesystem::path& path,
                       const std::vector<AnnotatedExample>& examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write corpus file " + path.string());
  write_complex_lcp(out, examples);
}

}  // namespace lexda::corpus
