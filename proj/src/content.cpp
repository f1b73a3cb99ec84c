#include "tdetect/content.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "tdetect/error.hpp"
#include "tdetect/resources.hpp"
#include "tdetect/utf8.hpp"

namespace tdetect {

namespace {

enum class Kind { word, punct };

struct Token {
  std::u32string text;
  Kind kind;
  std::u32string leading_space;
};

// ASCII punctuation separates words; apostrophes inside a word are kept so
// "don't" stays one token. Non-ASCII code points count as word characters.
bool is_punct(char32_t c) {
  return c < 0x80 && std::ispunct(static_cast<int>(c)) && c != U'\'';
}

std::vector<Token> segment(std::u32string_view text) {
  std::vector<Token> tokens;
  std::u32string space;
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t c = text[i];
    if (utf8::is_space(c)) {
      space.push_back(c);
      ++i;
    } else if (is_punct(c)) {
      tokens.push_back({std::u32string(1, c), Kind::punct, std::move(space)});
      space.clear();
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !utf8::is_space(text[j]) && !is_punct(text[j])) ++j;
      tokens.push_back({std::u32string(text.substr(i, j - i)), Kind::word, std::move(space)});
      space.clear();
      i = j;
    }
  }
  return tokens;
}

std::string ascii_lower(std::u32string_view word) {
  std::u32string lower(word);
  for (char32_t& c : lower) {
    if (utf8::is_ascii_upper(c)) c = c - U'A' + U'a';
  }
  return utf8::encode(lower);
}

}  // namespace

std::vector<std::string> parse_word_list(std::string_view text) {
  std::vector<std::string> words;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.push_back(line);
  }
  return words;
}

ContentExtractionConfig ContentExtractionConfig::defaults() {
  ContentExtractionConfig config;
  config.function_words = parse_word_list(resources::function_words());
  return config;
}

void ContentExtractionConfig::validate() const {
  if (function_words.empty()) {
    throw Error(ErrorCode::InvalidArgument, "function-word list is empty");
  }
  std::unordered_set<std::string> seen;
  for (const auto& w : function_words) {
    if (!seen.insert(w).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate function word: " + w);
    }
    if (ascii_lower(utf8::decode(w)) != w) {
      throw Error(ErrorCode::InvalidArgument, "function word not lowercase: " + w);
    }
  }
}

std::string extract_content(std::string_view text, const ContentExtractionConfig& config) {
  const std::unordered_set<std::string> stop(config.function_words.begin(),
                                             config.function_words.end());
  std::u32string out;
  bool first = true;
  for (Token& tok : segment(utf8::decode(text))) {
    if (tok.kind == Kind::punct && config.strip_punctuation) continue;
    if (tok.kind == Kind::word && stop.contains(ascii_lower(tok.text))) continue;
    if (!first) {
      if (config.collapse_whitespace || tok.leading_space.empty()) {
        out.push_back(U' ');
      } else {
        out += tok.leading_space;
      }
    }
    out += tok.text;
    first = false;
  }
  if (first) throw Error(ErrorCode::EmptyContent, "no content words retained");
  return utf8::encode(out);
}

}  // namespace tdetect
