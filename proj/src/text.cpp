#include "cilin/text.hpp"

#include <charconv>
#include <cmath>
#include <istream>

#include "cilin/errors.hpp"

namespace cilin {

UnencodableError::UnencodableError(std::vector<std::string> tokens)
    : Error("no in-vocabulary token among [" + join(tokens, ", ") + "]"), tokens_(std::move(tokens)) {}

namespace {

std::size_t utf8_width(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xE) return 3;
    if ((lead >> 3) == 0x1E) return 4;
    return 1;
}

} // namespace

std::vector<std::string> utf8_chars(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t w = utf8_width(static_cast<unsigned char>(text[i]));
        if (i + w > text.size()) w = text.size() - i;
        out.emplace_back(text.substr(i, w));
        i += w;
    }
    return out;
}

std::size_t utf8_length(std::string_view text) {
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        i += utf8_width(static_cast<unsigned char>(text[i]));
        ++n;
    }
    return n;
}

std::size_t display_width(std::string_view text) {
    std::size_t width = 0;
    for (const auto& ch : utf8_chars(text)) {
        char32_t cp = static_cast<unsigned char>(ch[0]);
        if (ch.size() > 1) {
            cp &= 0xFFu >> (ch.size() + 1);
            for (std::size_t i = 1; i < ch.size(); ++i) cp = (cp << 6) | (static_cast<unsigned char>(ch[i]) & 0x3Fu);
        }
        bool wide = (cp >= 0x1100 && cp <= 0x115F) || (cp >= 0x2E80 && cp <= 0xA4CF) || (cp >= 0xAC00 && cp <= 0xD7A3) ||
                    (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0xFE30 && cp <= 0xFE4F) || (cp >= 0xFF00 && cp <= 0xFF60) ||
                    (cp >= 0xFFE0 && cp <= 0xFFE6) || (cp >= 0x20000 && cp <= 0x3FFFD);
        width += wide ? 2 : 1;
    }
    return width;
}

bool contains_separator(std::string_view term) {
    return term.find(kPathSeparator) != std::string_view::npos;
}

std::vector<std::string> split(std::string_view text, std::string_view delimiter) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = text.find(delimiter, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(text.substr(start));
            return out;
        }
        out.emplace_back(text.substr(start, pos - start));
        start = pos + delimiter.size();
    }
}

std::string join(const std::vector<std::string>& parts, std::string_view delimiter) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += delimiter;
        out += parts[i];
    }
    return out;
}

std::string_view trim(std::string_view text) {
    const char* ws = " \t\r\n";
    auto b = text.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = text.find_last_not_of(ws);
    return text.substr(b, e - b + 1);
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last)
        throw LoadError("not a number: '" + std::string(text) + "'");
    return value;
}

long long parse_integer(std::string_view text) {
    long long value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw LoadError("not an integer: '" + std::string(text) + "'");
    return value;
}

void for_each_line(std::istream& in, const std::function<void(std::size_t, std::string_view)>& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        fn(line_no, line);
    }
}

std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t hash_string(std::string_view text, std::uint64_t seed) {
    std::uint64_t h = 0xCBF29CE484222325ull ^ mix64(seed);
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return mix64(h);
}

} // namespace cilin
