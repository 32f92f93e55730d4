#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace speechstd::text {

// Unicode NFC of UTF-8 input. Invalid sequences become U+FFFD.
std::string nfc(std::string_view utf8);

std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view scalars);

bool is_whitespace(char32_t c);

// Maximal runs of non-whitespace scalars after NFC.
std::vector<std::string> tokenize(std::string_view utf8);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

// NFC, whitespace runs collapsed to one U+0020, leading/trailing trimmed.
std::u32string collapse_whitespace(std::string_view utf8);

// Extended grapheme clusters of the NFC form.
std::vector<std::string> graphemes(std::string_view utf8);

}  // namespace speechstd::text
