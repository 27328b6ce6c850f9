#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/uchar.h>

#include "gir/error.hpp"
#include "gir/trec_io.hpp"
#include "gir/utf8.hpp"

namespace gir {

enum class field_mode { T, TD, TDN };

inline std::string_view to_string(field_mode mode) {
    switch (mode) {
    case field_mode::T: return "T";
    case field_mode::TD: return "TD";
    case field_mode::TDN: return "TDN";
    }
    return "?";
}

inline std::optional<field_mode> parse_field_mode(std::string_view s) {
    if (s == "T") {
        return field_mode::T;
    }
    if (s == "TD") {
        return field_mode::TD;
    }
    if (s == "TDN") {
        return field_mode::TDN;
    }
    return std::nullopt;
}

/// Letters, combining marks and decimal digits form terms; every other code point
/// separates them. ZWJ/ZWNJ count as marks so Indic conjunct spellings stay intact.
inline bool is_term_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
    }
    if (cp == 0x200C || cp == 0x200D) {
        return true;
    }
    switch (u_charType(static_cast<UChar32>(cp))) {
    case U_UPPERCASE_LETTER:
    case U_LOWERCASE_LETTER:
    case U_TITLECASE_LETTER:
    case U_MODIFIER_LETTER:
    case U_OTHER_LETTER:
    case U_NON_SPACING_MARK:
    case U_ENCLOSING_MARK:
    case U_COMBINING_SPACING_MARK:
    case U_DECIMAL_DIGIT_NUMBER: return true;
    default: return false;
    }
}

/// Calls `fn(std::string_view term)` for each token of `text` in order. Only ASCII
/// letters are case-folded; everything else passes through byte-for-byte.
/// Ill-formed UTF-8 bytes act as separators.
template <typename Fn>
void for_each_token(std::string_view text, Fn&& fn) {
    std::string term;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t start = pos;
        char32_t cp = utf8::decode(text, pos);
        if (cp != utf8::invalid && is_term_char(cp)) {
            if (cp >= 'A' && cp <= 'Z') {
                term.push_back(static_cast<char>(cp - 'A' + 'a'));
            } else {
                term.append(text.substr(start, pos - start));
            }
        } else if (!term.empty()) {
            fn(std::string_view(term));
            term.clear();
        }
    }
    if (!term.empty()) {
        fn(std::string_view(term));
    }
}

inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    for_each_token(text, [&](std::string_view t) { tokens.emplace_back(t); });
    return tokens;
}

/// Parses a stoplist: one entry per line, `#` starts a comment. Entries are passed
/// through the tokenizer so they match indexed terms.
inline std::set<std::string, std::less<>> parse_stoplist(std::string_view s) {
    detail::require_utf8(s);
    std::set<std::string, std::less<>> words;
    detail::for_each_line(s, [&](std::size_t, std::string_view line) {
        for_each_token(line.substr(0, line.find('#')), [&](std::string_view t) { words.emplace(t); });
    });
    return words;
}

/// Tokenizer plus optional stoplist. The same analyzer must be used for indexing and
/// querying; the index persists its stoplist for that reason.
class analyzer {
  public:
    analyzer() = default;
    explicit analyzer(std::set<std::string, std::less<>> stopwords)
        : m_stopwords(std::move(stopwords)) {}

    template <typename Fn>
    void for_each_term(std::string_view text, Fn&& fn) const {
        for_each_token(text, [&](std::string_view t) {
            if (m_stopwords.empty() || !m_stopwords.contains(t)) {
                fn(t);
            }
        });
    }

    [[nodiscard]] std::vector<std::string> analyze(std::string_view text) const {
        std::vector<std::string> terms;
        for_each_term(text, [&](std::string_view t) { terms.emplace_back(t); });
        return terms;
    }

    [[nodiscard]] std::set<std::string, std::less<>> const& stopwords() const { return m_stopwords; }

    bool operator==(analyzer const&) const = default;

  private:
    std::set<std::string, std::less<>> m_stopwords;
};

/// Query terms with their query-term frequencies (all >= 1).
struct query_bag {
    std::map<std::string, std::uint32_t, std::less<>> terms;
    field_mode mode = field_mode::T;

    [[nodiscard]] bool empty() const { return terms.empty(); }
    bool operator==(query_bag const&) const = default;
};

inline std::string topic_text(topic const& t, field_mode mode) {
    std::string text = t.title;
    if (mode == field_mode::TD || mode == field_mode::TDN) {
        text += ' ';
        text += t.desc;
    }
    if (mode == field_mode::TDN) {
        text += ' ';
        text += t.narr;
    }
    return text;
}

/// Throws `empty_query` when no term survives analysis.
inline query_bag build_query_bag(topic const& t, field_mode mode, analyzer const& an = {}) {
    query_bag bag;
    bag.mode = mode;
    an.for_each_term(topic_text(t, mode), [&](std::string_view term) {
        auto it = bag.terms.find(term);
        if (it == bag.terms.end()) {
            bag.terms.emplace(std::string(term), 1);
        } else {
            ++it->second;
        }
    });
    if (bag.empty()) {
        throw empty_query(t.num);
    }
    return bag;
}

}  // namespace gir
