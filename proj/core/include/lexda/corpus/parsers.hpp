#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lexda/corpus/example.hpp"

namespace lexda::corpus {

// CompLex LCP 2021 release layout (tab separated, one header row):
//   id  corpus  sentence  token  complexity
// `corpus` becomes the group. The token is located in the sentence (first
// whole-word match, then any match, then a case-insensitive match).
std::vector<AnnotatedExample> parse_complex_lcp(const std::filesystem::path& path);
std::vector<AnnotatedExample> parse_complex_lcp(std::istream& in);

enum class CwiGrouping { language, subcorpus };

struct CwiOptions {
  CwiGrouping grouping = CwiGrouping::language;
  /// Replaces the group inferred from the file name.
  std::optional<std::string> group;
};

// CWI 2018 shared-task layout (tab separated, no header, 11 columns):
//   hit-id  sentence  start  end  target  native-seen  non-native-seen
//   native-marked  non-native-marked  binary-label  probabilistic-label
// Offsets are code points into the raw sentence. The probabilistic label is
// the gold complexity.
std::vector<AnnotatedExample> parse_cwi2018(const std::filesystem::path& path,
                                            const CwiOptions& options = {});
std::vector<AnnotatedExample> parse_cwi2018(std::istream& in, const std::string& group);

/// Group implied by a CWI 2018 file name such as "German_Train.tsv".
std::string cwi2018_group_from_filename(const std::filesystem::path& path, CwiGrouping grouping);

// BenchLS layout (tab separated, no header):
//   sentence  target  position  rank:candidate  rank:candidate ...
// position indexes the whitespace-separated tokens of the sentence.
// Candidates are returned best rank first; equal ranks keep file order.
std::vector<SimplificationExample> parse_benchls(const std::filesystem::path& path);
std::vector<SimplificationExample> parse_benchls(std::istream& in);

/// Writes examples in the CompLex layout (so every corpus can flow through
/// parse_complex_lcp).
void write_complex_lcp(std::ostream& out, const std::vector<AnnotatedExample>& examples);
void write_complex_lcp(const std::filesystem::path& path,
                       const std::vector<AnnotatedExample>& examples);

}  // namespace lexda::corpus
