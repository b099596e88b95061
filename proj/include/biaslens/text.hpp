#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace biaslens::text {

/// Lowercases, splits on every non-alphanumeric code point and drops tokens
/// shorter than two code points. Invalid UTF-8 bytes act as separators.
///
/// Alphanumeric means ASCII letters and digits plus every non-ASCII code
/// point outside the punctuation, symbol and space blocks listed in
/// text.cpp. Lowercasing covers ASCII, Latin-1, Latin Extended-A, Greek and
/// Cyrillic; other scripts pass through unchanged.
std::vector<std::string> tokenize(std::string_view input);

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// Number of code points, counting each invalid byte as one.
std::size_t utf8_length(std::string_view s);

/// Longest prefix of at most max_code_points code points; never splits a
/// multi-byte sequence.
std::string_view utf8_prefix(std::string_view s, std::size_t max_code_points);

}  // namespace biaslens::text
