#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace tdetect {

struct ContentExtractionConfig {
  /// Lowercase word forms, non-empty and duplicate-free.
  std::vector<std::string> function_words;
  bool strip_punctuation = true;
  bool collapse_whitespace = true;

  /// The embedded English list (data/function_words.txt).
  static ContentExtractionConfig defaults();
  void validate() const;
};

/// One word per line, UTF-8, LF endings. Blank lines are skipped.
std::vector<std::string> parse_word_list(std::string_view text);

/// Drops every word whose lowercase form is a function word, and punctuation
/// when configured. Retained words keep their case. Throws
/// Error(EmptyContent) when nothing is retained.
std::string extract_content(std::string_view text, const ContentExtractionConfig& config);

}  // namespace tdetect
