#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace nontextpd::utf8 {

inline constexpr char32_t replacement = 0xFFFD;

struct Decoded {
    char32_t cp;
    std::size_t length; // bytes consumed, >= 1
};

/// Decodes one code point starting at `pos`. Malformed input yields U+FFFD
/// and consumes a single byte so callers always make progress.
inline Decoded decode(std::string_view s, std::size_t pos) noexcept {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) return {b0, 1};
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else return {replacement, 1};
    if (pos + len > s.size()) return {replacement, 1};
    for (std::size_t i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) return {replacement, 1};
        cp = (cp << 6) | (b & 0x3F);
    }
    // reject overlong forms and surrogates
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
        return {replacement, 1};
    return {cp, len};
}

inline void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

/// Word characters: ASCII alphanumerics plus every non-ASCII code point
/// outside the common punctuation, symbol, and space blocks.
inline bool is_word_char(char32_t cp) noexcept {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    if (cp < 0xC0) return cp == 0xAA || cp == 0xB2 || cp == 0xB3 || cp == 0xB5 || cp == 0xB9 || cp == 0xBA;
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp == 0x1680) return false;
    if (cp >= 0x2000 && cp <= 0x206F) return false; // general punctuation, spaces
    if (cp >= 0x20A0 && cp <= 0x20CF) return false; // currency
    if (cp >= 0x2190 && cp <= 0x2BFF) return false; // arrows, math operators, shapes
    if (cp >= 0x3000 && cp <= 0x303F) return false; // CJK punctuation
    if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
    if (cp >= 0xFF1A && cp <= 0xFF20) return false;
    if (cp >= 0xFF3B && cp <= 0xFF40) return false;
    if (cp >= 0xFF5B && cp <= 0xFF65) return false;
    if (cp == replacement) return false;
    return true;
}

/// Simple case fold covering ASCII, Latin-1, Latin Extended-A, Greek and
/// Cyrillic. The folded code point always encodes to the same byte length.
inline char32_t to_lower(char32_t cp) noexcept {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp < 0xC0) return cp;
    if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 0x20;
    if (cp >= 0x100 && cp <= 0x137) return cp | 1;
    if (cp >= 0x139 && cp <= 0x148) return (cp & 1) ? cp + 1 : cp;
    if (cp >= 0x14A && cp <= 0x177) return cp | 1;
    if (cp >= 0x179 && cp <= 0x17E) return (cp & 1) ? cp + 1 : cp;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    return cp;
}

inline std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t pos = 0; pos < s.size();) {
        const auto d = decode(s, pos);
        if (d.cp == replacement) out.append(s.substr(pos, d.length));
        else append(out, to_lower(d.cp));
        pos += d.length;
    }
    return out;
}

inline std::size_t length(std::string_view s) noexcept {
    std::size_t n = 0;
    for (std::size_t pos = 0; pos < s.size(); ++n) pos += decode(s, pos).length;
    return n;
}

/// Byte offset of the code point with index `cp_index`; nullopt when past the end.
/// An index equal to the code point count maps to s.size().
inline std::optional<std::size_t> byte_offset(std::string_view s, std::size_t cp_index) noexcept {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < cp_index; ++i) {
        if (pos >= s.size()) return std::nullopt;
        pos += decode(s, pos).length;
    }
    return pos;
}

/// Code point index of the code point beginning at byte `offset`.
inline std::size_t codepoint_index(std::string_view s, std::size_t offset) noexcept {
    std::size_t n = 0;
    for (std::size_t pos = 0; pos < offset && pos < s.size(); ++n) pos += decode(s, pos).length;
    return n;
}

} // namespace nontextpd::utf8
