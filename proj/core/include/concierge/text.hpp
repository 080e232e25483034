#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by search, keyword extraction and speech markup.
namespace concierge::text {

/// Decodes UTF-8. Malformed sequences decode to U+FFFD; never throws.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view cps);
std::string encode(char32_t cp);

bool is_valid_utf8(std::string_view bytes) noexcept;

bool is_space(char32_t cp) noexcept;

std::string_view trim(std::string_view s) noexcept;
std::u32string_view trim(std::u32string_view s) noexcept;

/// Trim, fold full-width ASCII to half-width, lowercase ASCII.
std::u32string normalize(std::u32string_view s);
std::string normalize(std::string_view utf8);

/// Splits on ',', '、', '，' and ';', trimming each item and dropping empties.
std::vector<std::string> split_list(std::string_view utf8);

/// Splits on whitespace and Japanese/ASCII punctuation.
std::vector<std::u32string> tokenize(std::u32string_view s);

/// Splits into lines on '\n', stripping a trailing '\r' from each.
std::vector<std::string_view> lines(std::string_view s);

}  // namespace concierge::text
