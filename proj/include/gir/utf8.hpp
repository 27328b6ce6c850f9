#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace gir::utf8 {

inline constexpr std::size_t npos = std::string_view::npos;
inline constexpr char32_t invalid = 0xFFFFFFFF;

/// Decodes one code point starting at `pos`, advancing `pos` past it.
/// Returns `invalid` (and advances by one byte) on an ill-formed sequence,
/// including overlong forms, surrogates and values above U+10FFFF.
inline char32_t decode(std::string_view s, std::size_t& pos) noexcept {
    auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(s[i]); };
    std::uint8_t lead = byte(pos);
    if (lead < 0x80) {
        ++pos;
        return lead;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((lead & 0xE0) == 0xC0) {
        len = 2, cp = lead & 0x1F, min = 0x80;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3, cp = lead & 0x0F, min = 0x800;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4, cp = lead & 0x07, min = 0x10000;
    } else {
        ++pos;
        return invalid;
    }
    if (pos + len > s.size()) {
        ++pos;
        return invalid;
    }
    for (std::size_t i = 1; i < len; ++i) {
        std::uint8_t b = byte(pos + i);
        if ((b & 0xC0) != 0x80) {
            ++pos;
            return invalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++pos;
        return invalid;
    }
    pos += len;
    return cp;
}

/// Byte offset of the first ill-formed sequence, or `npos` if `s` is valid UTF-8.
inline std::size_t find_invalid(std::string_view s) noexcept {
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t start = pos;
        if (decode(s, pos) == invalid) {
            return start;
        }
    }
    return npos;
}

inline bool is_valid(std::string_view s) noexcept { return find_invalid(s) == npos; }

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

}  // namespace gir::utf8
