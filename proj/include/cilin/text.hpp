#ifndef CILIN_TEXT_HPP
#define CILIN_TEXT_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cilin {

// Reserved hypernym-path separator (U+2192).
inline constexpr std::string_view kPathSeparator = "\xE2\x86\x92";

// Splits UTF-8 text into code points, each returned as its own string.
// Invalid lead bytes are passed through as single-byte units.
std::vector<std::string> utf8_chars(std::string_view text);

std::size_t utf8_length(std::string_view text);
// Terminal columns, counting East Asian wide characters as two.
std::size_t display_width(std::string_view text);

bool contains_separator(std::string_view term);

// Splits on a literal delimiter, keeping empty fields.
std::vector<std::string> split(std::string_view text, std::string_view delimiter);

std::string join(const std::vector<std::string>& parts, std::string_view delimiter);

std::string_view trim(std::string_view text);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Parses a whole-string number; throws LoadError on trailing garbage.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

// Calls `fn(line_number, line)` for each non-blank line, CR stripped. Line numbers are 1-based.
void for_each_line(std::istream& in, const std::function<void(std::size_t, std::string_view)>& fn);

// Stable 64-bit mix used wherever a seeded, platform-independent hash is needed.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_string(std::string_view text, std::uint64_t seed);

} // namespace cilin

#endif
