#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tdetect/error.hpp"

namespace tdetect::utf8 {

/// Malformed UTF-8; offset is the byte position of the first bad sequence.
class DecodeError : public Error {
 public:
  explicit DecodeError(std::size_t offset)
      : Error(ErrorCode::InvalidUtf8,
              "invalid UTF-8 at byte offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Strict decoder: rejects overlongs, surrogates and code points past U+10FFFF.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view code_points);
void append(std::string& out, char32_t cp);

bool is_valid(std::string_view bytes);

inline bool is_ascii_letter(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}
inline bool is_ascii_upper(char32_t c) { return c >= U'A' && c <= U'Z'; }
inline bool is_ascii_lower(char32_t c) { return c >= U'a' && c <= U'z'; }
inline bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

/// ASCII whitespace plus the Unicode space separators folded by the defense.
bool is_space(char32_t c);

}  // namespace tdetect::utf8
