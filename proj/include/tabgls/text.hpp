#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tabgls::text {

bool is_space(char c) noexcept;

std::string_view trim(std::string_view s) noexcept;

/// Trims both ends and collapses internal whitespace runs to one space.
std::string collapse_whitespace(std::string_view s);

/// ASCII lowercase; bytes >= 0x80 pass through unchanged.
std::string to_lower(std::string_view s);

bool iequals(std::string_view a, std::string_view b) noexcept;
bool istarts_with(std::string_view s, std::string_view prefix) noexcept;
/// Case-insensitive find; npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0) noexcept;

void append_utf8(std::string& out, std::uint32_t codepoint);

std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace tabgls::text
