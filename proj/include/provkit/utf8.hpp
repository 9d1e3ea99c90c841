#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace provkit::utf8 {

struct CodePoint {
  char32_t value;
  std::string_view bytes;  // the encoded form inside the source string
};

// Decodes UTF-8 leniently: an invalid or truncated sequence becomes a single
// U+FFFD code point spanning one byte, so every input byte is covered.
std::vector<CodePoint> decode(std::string_view text);

bool is_space(char32_t cp);

}  // namespace provkit::utf8
