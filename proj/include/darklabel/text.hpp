#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace darklabel::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
/// Position of `needle` in `haystack`, ignoring ASCII case; npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0);
std::vector<std::string> split_lines(std::string_view s);
/// Lower-cased alphanumeric runs (apostrophes kept inside words).
std::vector<std::string> words(std::string_view s);
/// Decodes UTF-8 into Unicode scalar values; invalid bytes map to U+FFFD.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);
/// Current UTC time, ISO-8601 with milliseconds.
std::string now_iso8601();

}  // namespace darklabel::text
