#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace lexda::corpus {

/// Code-point offsets [start, end) into the (NFC) sentence.
struct TargetSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
};

struct AnnotatorCounts {
  int native = 0;
  int non_native = 0;
  int native_marked = 0;
  int non_native_marked = 0;
};

/// One lexical-complexity record. `group` is the domain, language, or task
/// label the discriminators work with.
struct AnnotatedExample {
  std::string id;
  std::string group;
  std::string sentence;
  TargetSpan target;
  double gold_complexity = 0.0;
  std::optional<AnnotatorCounts> annotators;
};

/// One lexical-simplification record: a sentence, the complex word at a
/// whitespace-token position, and substitutes ordered best first.
struct SimplificationExample {
  std::string sentence;
  std::string target;
  std::size_t position = 0;
  std::vector<std::string> candidates;
};

/// Throws ValidationError unless gold is in [0, 1] and the span slices the
/// sentence to exactly the surface form.
void validate(const AnnotatedExample& example, std::size_t line = 0);

}  // namespace lexda::corpus
