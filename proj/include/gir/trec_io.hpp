#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "gir/error.hpp"
#include "gir/utf8.hpp"

namespace gir {

struct raw_document {
    std::string docno;
    std::string text;

    bool operator==(raw_document const&) const = default;
};

struct topic {
    std::string num;
    std::string title;
    std::string desc;
    std::string narr;

    bool operator==(topic const&) const = default;
};

struct run_entry {
    std::string num;
    std::string docno;
    std::size_t rank = 0;
    double score = 0.0;
    std::string tag;

    bool operator==(run_entry const&) const = default;
};

/// Relevance judgments: topic -> docno -> grade. A document is relevant iff grade > 0.
class qrels {
  public:
    using topic_judgments = std::map<std::string, int, std::less<>>;

    /// Returns false if a different grade is already recorded for the pair.
    bool add(std::string const& num, std::string const& docno, int grade) {
        auto& judgments = m_judgments[num];
        auto [it, inserted] = judgments.emplace(docno, grade);
        if (inserted) {
            return true;
        }
        return it->second == grade;
    }

    [[nodiscard]] std::optional<int> grade(std::string_view num, std::string_view docno) const {
        auto const* judgments = find(num);
        if (judgments == nullptr) {
            return std::nullopt;
        }
        auto it = judgments->find(docno);
        if (it == judgments->end()) {
            return std::nullopt;
        }
        return it->second;
    }

    [[nodiscard]] bool is_relevant(std::string_view num, std::string_view docno) const {
        auto g = grade(num, docno);
        return g && *g > 0;
    }

    [[nodiscard]] std::size_t relevant_count(std::string_view num) const {
        return count_if(num, [](int g) { return g > 0; });
    }

    [[nodiscard]] std::size_t nonrelevant_count(std::string_view num) const {
        return count_if(num, [](int g) { return g <= 0; });
    }

    [[nodiscard]] bool has_topic(std::string_view num) const { return find(num) != nullptr; }

    [[nodiscard]] std::vector<std::string> topics() const {
        std::vector<std::string> out;
        for (auto const& [num, _] : m_judgments) {
            out.push_back(num);
        }
        return out;
    }

    [[nodiscard]] topic_judgments const* find(std::string_view num) const {
        auto it = m_judgments.find(num);
        return it == m_judgments.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::map<std::string, topic_judgments, std::less<>> const& judgments() const {
        return m_judgments;
    }

    [[nodiscard]] bool empty() const { return m_judgments.empty(); }

  private:
    template <typename Pred>
    std::size_t count_if(std::string_view num, Pred pred) const {
        auto const* judgments = find(num);
        if (judgments == nullptr) {
            return 0;
        }
        std::size_t n = 0;
        for (auto const& [_, g] : *judgments) {
            n += pred(g) ? 1 : 0;
        }
        return n;
    }

    std::map<std::string, topic_judgments, std::less<>> m_judgments;
};

namespace detail {

    inline bool is_space(char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    }

    inline std::string_view trim(std::string_view s) {
        while (!s.empty() && is_space(s.front())) {
            s.remove_prefix(1);
        }
        while (!s.empty() && is_space(s.back())) {
            s.remove_suffix(1);
        }
        return s;
    }

    inline std::vector<std::string_view> split_ws(std::string_view line) {
        std::vector<std::string_view> fields;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && is_space(line[i])) {
                ++i;
            }
            std::size_t start = i;
            while (i < line.size() && !is_space(line[i])) {
                ++i;
            }
            if (i > start) {
                fields.push_back(line.substr(start, i - start));
            }
        }
        return fields;
    }

    inline bool has_space(std::string_view s) {
        for (char c : s) {
            if (is_space(c)) {
                return true;
            }
        }
        return false;
    }

    template <typename Int>
    std::optional<Int> parse_int(std::string_view s) {
        Int value{};
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            return std::nullopt;
        }
        return value;
    }

    inline std::optional<double> parse_double(std::string_view s) {
        double value{};
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
            return std::nullopt;
        }
        return value;
    }

    inline void require_utf8(std::string_view s) {
        if (auto bad = utf8::find_invalid(s); bad != utf8::npos) {
            throw parse_error("invalid UTF-8 at byte offset " + std::to_string(bad), bad);
        }
    }

    /// Iterates over lines (LF separated, trailing CR stripped), passing 1-based numbers.
    template <typename Fn>
    void for_each_line(std::string_view s, Fn fn) {
        std::size_t line_no = 0;
        while (!s.empty()) {
            auto nl = s.find('\n');
            auto line = s.substr(0, nl);
            if (!line.empty() && line.back() == '\r') {
                line.remove_suffix(1);
            }
            fn(++line_no, line);
            if (nl == std::string_view::npos) {
                break;
            }
            s.remove_prefix(nl + 1);
        }
    }

    inline std::size_t skip_space(std::string_view s, std::size_t pos) {
        while (pos < s.size() && is_space(s[pos])) {
            ++pos;
        }
        return pos;
    }

    inline std::string format_score(double score) {
        char buf[64];
        int n = std::snprintf(buf, sizeof(buf), "%.4f", score);
        return std::string(buf, static_cast<std::size_t>(n));
    }

    /// Content of the `open`...`close` element inside `body`. An element without its
    /// closing tag extends up to the next '<' (classic unclosed TREC topic fields).
    inline std::optional<std::string_view> element(std::string_view body,
                                                   std::string_view open,
                                                   std::string_view close) {
        auto start = body.find(open);
        if (start == std::string_view::npos) {
            return std::nullopt;
        }
        start += open.size();
        auto end = body.find(close, start);
        if (end == std::string_view::npos) {
            end = body.find('<', start);
            if (end == std::string_view::npos) {
                end = body.size();
            }
        }
        return body.substr(start, end - start);
    }

}  // namespace detail

inline std::string read_all(std::istream& is) {
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

/// Parses `<DOC><DOCNO>..</DOCNO><TEXT>..</TEXT></DOC>` blocks. Tags are case-sensitive;
/// anything other than whitespace between blocks is an error.
inline std::vector<raw_document> parse_documents(std::string_view s) {
    using namespace std::string_view_literals;
    detail::require_utf8(s);

    std::vector<raw_document> docs;
    std::unordered_set<std::string> seen;
    std::size_t pos = detail::skip_space(s, 0);
    while (pos < s.size()) {
        if (s.substr(pos, 5) != "<DOC>"sv) {
            throw parse_error("expected <DOC> at byte offset " + std::to_string(pos), pos);
        }
        std::size_t block = pos;
        pos += 5;
        auto end = s.find("</DOC>"sv, pos);
        auto nested = s.find("<DOC>"sv, pos);
        auto body = s.substr(pos, end == std::string_view::npos ? s.size() - pos : end - pos);

        auto context = [&]() -> std::string {
            auto d = detail::element(body, "<DOCNO>", "</DOCNO>");
            return d ? " (docno " + std::string(detail::trim(*d)) + ")" : std::string();
        };
        if (end == std::string_view::npos) {
            throw parse_error("missing </DOC> for block at byte offset " + std::to_string(block)
                                  + context(),
                              block);
        }
        if (nested != std::string_view::npos && nested < end) {
            throw parse_error("nested <DOC> at byte offset " + std::to_string(nested) + context(),
                              nested);
        }

        auto docno_open = body.find("<DOCNO>"sv);
        if (docno_open == std::string_view::npos) {
            throw parse_error("missing <DOCNO> in block at byte offset " + std::to_string(block),
                              block);
        }
        auto docno_close = body.find("</DOCNO>"sv, docno_open);
        if (docno_close == std::string_view::npos) {
            throw parse_error("missing </DOCNO> in block at byte offset " + std::to_string(block),
                              block);
        }
        if (body.find("<DOCNO>"sv, docno_open + 7) != std::string_view::npos) {
            throw parse_error("repeated <DOCNO> in block at byte offset " + std::to_string(block)
                                  + context(),
                              block);
        }
        raw_document doc;
        doc.docno = std::string(detail::trim(body.substr(docno_open + 7, docno_close - docno_open - 7)));
        if (doc.docno.empty() || detail::has_space(doc.docno)) {
            throw parse_error("invalid docno in block at byte offset " + std::to_string(block), block);
        }

        auto text_open = body.find("<TEXT>"sv);
        if (text_open != std::string_view::npos) {
            auto text_close = body.find("</TEXT>"sv, text_open);
            if (text_close == std::string_view::npos) {
                throw parse_error("missing </TEXT> in block at byte offset " + std::to_string(block)
                                      + context(),
                                  block);
            }
            doc.text = std::string(body.substr(text_open + 6, text_close - text_open - 6));
        }

        if (!seen.insert(doc.docno).second) {
            throw parse_error("duplicate docno " + doc.docno + " at byte offset "
                                  + std::to_string(block),
                              block);
        }
        docs.push_back(std::move(doc));
        pos = detail::skip_space(s, end + 6);
    }
    return docs;
}

inline std::vector<raw_document> parse_documents(std::istream& is) {
    return parse_documents(read_all(is));
}

inline std::string serialize_documents(std::span<raw_document const> docs) {
    std::string out;
    for (auto const& doc : docs) {
        out += "<DOC>\n<DOCNO>";
        out += doc.docno;
        out += "</DOCNO>\n<TEXT>";
        out += doc.text;
        out += "</TEXT>\n</DOC>\n";
    }
    return out;
}

/// Parses `<top>` blocks. `<num>` and `<title>` are required; `<desc>` and `<narr>`
/// default to empty.
inline std::vector<topic> parse_topics(std::string_view s) {
    using namespace std::string_view_literals;
    detail::require_utf8(s);

    std::vector<topic> topics;
    std::set<std::string, std::less<>> seen;
    std::size_t pos = detail::skip_space(s, 0);
    while (pos < s.size()) {
        if (s.substr(pos, 5) != "<top>"sv) {
            throw parse_error("expected <top> at byte offset " + std::to_string(pos), pos);
        }
        std::size_t block = pos;
        auto end = s.find("</top>"sv, pos + 5);
        if (end == std::string_view::npos) {
            throw parse_error("missing </top> for block at byte offset " + std::to_string(block),
                              block);
        }
        auto body = s.substr(pos + 5, end - pos - 5);
        if (auto nested = body.find("<top>"sv); nested != std::string_view::npos) {
            throw parse_error("nested <top> at byte offset " + std::to_string(pos + 5 + nested),
                              pos + 5 + nested);
        }

        auto num = detail::element(body, "<num>", "</num>");
        if (!num || detail::trim(*num).empty()) {
            throw parse_error("missing <num> in topic at byte offset " + std::to_string(block), block);
        }
        auto title = detail::element(body, "<title>", "</title>");
        topic t;
        t.num = std::string(detail::trim(*num));
        if (!title || detail::trim(*title).empty()) {
            throw parse_error("missing <title> in topic " + t.num, block);
        }
        t.title = std::string(detail::trim(*title));
        if (auto desc = detail::element(body, "<desc>", "</desc>")) {
            t.desc = std::string(detail::trim(*desc));
        }
        if (auto narr = detail::element(body, "<narr>", "</narr>")) {
            t.narr = std::string(detail::trim(*narr));
        }
        if (!seen.insert(t.num).second) {
            throw parse_error("duplicate topic num " + t.num, block);
        }
        topics.push_back(std::move(t));
        pos = detail::skip_space(s, end + 6);
    }
    return topics;
}

inline std::vector<topic> parse_topics(std::istream& is) { return parse_topics(read_all(is)); }

inline std::string write_topics(std::span<topic const> topics) {
    std::string out;
    for (auto const& t : topics) {
        out += "<top>\n<num>" + t.num + "</num>\n<title>" + t.title + "</title>\n<desc>" + t.desc
            + "</desc>\n<narr>" + t.narr + "</narr>\n</top>\n";
    }
    return out;
}

/// One judgment per line: `num iteration docno grade`. The iteration column is ignored.
inline qrels parse_qrels(std::string_view s) {
    detail::require_utf8(s);
    qrels out;
    detail::for_each_line(s, [&](std::size_t line_no, std::string_view line) {
        auto fields = detail::split_ws(line);
        if (fields.empty()) {
            return;
        }
        auto where = " on qrels line " + std::to_string(line_no);
        if (fields.size() != 4) {
            throw parse_error("expected 4 columns, got " + std::to_string(fields.size()) + where,
                              line_no);
        }
        auto grade = detail::parse_int<int>(fields[3]);
        if (!grade) {
            throw parse_error("non-integer grade '" + std::string(fields[3]) + "'" + where, line_no);
        }
        if (*grade < 0) {
            throw parse_error("negative grade" + where, line_no);
        }
        if (!out.add(std::string(fields[0]), std::string(fields[2]), *grade)) {
            throw parse_error("conflicting grade for (" + std::string(fields[0]) + ", "
                                  + std::string(fields[2]) + ")" + where,
                              line_no);
        }
    });
    return out;
}

inline qrels parse_qrels(std::istream& is) { return parse_qrels(read_all(is)); }

inline std::string write_qrels(qrels const& q) {
    std::string out;
    for (auto const& [num, judgments] : q.judgments()) {
        for (auto const& [docno, grade] : judgments) {
            out += num + " 0 " + docno + " " + std::to_string(grade) + "\n";
        }
    }
    return out;
}

/// True if `a` precedes `b` in the canonical ranking order: score descending, then
/// docno descending.
inline bool canonical_before(double score_a, std::string_view docno_a,
                             double score_b, std::string_view docno_b) {
    if (score_a != score_b) {
        return score_a > score_b;
    }
    return docno_a > docno_b;
}

/// Checks the run-entry invariants: per-topic contiguous blocks, ranks 1..k, distinct
/// docnos, canonical order, and whitespace-free identifiers.
inline void validate_run(std::span<run_entry const> entries) {
    std::set<std::string, std::less<>> finished;
    std::unordered_set<std::string_view> docnos;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto const& e = entries[i];
        auto where = " at run entry " + std::to_string(i + 1);
        if (e.num.empty() || e.docno.empty() || e.tag.empty() || detail::has_space(e.num)
            || detail::has_space(e.docno) || detail::has_space(e.tag)) {
            throw contract_error("empty or whitespace-containing field" + where);
        }
        if (!std::isfinite(e.score)) {
            throw contract_error("non-finite score" + where);
        }
        bool new_topic = i == 0 || entries[i - 1].num != e.num;
        if (new_topic) {
            if (i > 0) {
                finished.insert(entries[i - 1].num);
            }
            if (finished.contains(e.num)) {
                throw contract_error("topic " + e.num + " is not contiguous" + where);
            }
            docnos.clear();
            if (e.rank != 1) {
                throw contract_error("first rank of topic " + e.num + " is not 1" + where);
            }
        } else {
            auto const& prev = entries[i - 1];
            if (e.rank != prev.rank + 1) {
                throw contract_error("rank gap in topic " + e.num + where);
            }
            if (!canonical_before(prev.score, prev.docno, e.score, e.docno)) {
                throw contract_error("entries out of canonical order in topic " + e.num + where);
            }
        }
        if (!docnos.insert(e.docno).second) {
            throw contract_error("duplicate docno " + e.docno + " in topic " + e.num + where);
        }
    }
}

/// Writes `num Q0 docno rank score tag` lines, score fixed to four decimals.
inline void write_run(std::ostream& os, std::span<run_entry const> entries) {
    validate_run(entries);
    for (auto const& e : entries) {
        os << e.num << " Q0 " << e.docno << ' ' << e.rank << ' ' << detail::format_score(e.score)
           << ' ' << e.tag << '\n';
    }
}

inline std::string write_run(std::span<run_entry const> entries) {
    validate_run(entries);
    std::string out;
    for (auto const& e : entries) {
        out += e.num;
        out += " Q0 ";
        out += e.docno;
        out += ' ';
        out += std::to_string(e.rank);
        out += ' ';
        out += detail::format_score(e.score);
        out += ' ';
        out += e.tag;
        out += '\n';
    }
    return out;
}

inline std::vector<run_entry> parse_run(std::string_view s) {
    detail::require_utf8(s);
    std::vector<run_entry> entries;
    detail::for_each_line(s, [&](std::size_t line_no, std::string_view line) {
        auto fields = detail::split_ws(line);
        if (fields.empty()) {
            return;
        }
        auto where = " on run line " + std::to_string(line_no);
        if (fields.size() != 6) {
            throw parse_error("expected 6 columns, got " + std::to_string(fields.size()) + where,
                              line_no);
        }
        auto rank = detail::parse_int<std::size_t>(fields[3]);
        if (!rank || *rank == 0) {
            throw parse_error("invalid rank '" + std::string(fields[3]) + "'" + where, line_no);
        }
        auto score = detail::parse_double(fields[4]);
        if (!score) {
            throw parse_error("invalid score '" + std::string(fields[4]) + "'" + where, line_no);
        }
        entries.push_back(run_entry{std::string(fields[0]), std::string(fields[2]), *rank, *score,
                                    std::string(fields[5])});
    });
    return entries;
}

inline std::vector<run_entry> parse_run(std::istream& is) { return parse_run(read_all(is)); }

}  // namespace gir
