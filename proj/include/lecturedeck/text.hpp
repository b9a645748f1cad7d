#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lecturedeck::text {

/// Decodes UTF-8; invalid bytes become U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
std::size_t count_code_points(std::string_view s);

char32_t to_lower(char32_t c);
bool is_alnum(char32_t c);
bool is_space(char32_t c);

/// Lowercased, whitespace runs collapsed to one space, ends trimmed.
std::string normalize_title(std::string_view s);

std::string trim(std::string_view s);

}  // namespace lecturedeck::text
