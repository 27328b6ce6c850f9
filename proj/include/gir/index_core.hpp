#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <set>
#include <utility>
#include <vector>

#include <unistd.h>
#include <zlib.h>

#include "gir/error.hpp"
#include "gir/text_analysis.hpp"
#include "gir/trec_io.hpp"

namespace gir {

/// Collection-wide counts. The average document length is derived, never stored,
/// so avg_doc_len() * num_docs == total_tokens holds exactly up to rounding.
struct collection_stats {
    std::uint64_t num_docs = 0;
    std::uint64_t total_tokens = 0;
    std::uint64_t vocab_size = 0;

    [[nodiscard]] double avg_doc_len() const {
        return num_docs == 0 ? 0.0
                             : static_cast<double>(total_tokens) / static_cast<double>(num_docs);
    }

    bool operator==(collection_stats const&) const = default;
};

struct term_stats {
    std::uint64_t df = 0;  ///< documents containing the term
    std::uint64_t cf = 0;  ///< total occurrences in the collection

    bool operator==(term_stats const&) const = default;
};

struct posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;

    bool operator==(posting const&) const = default;
};

using posting_list = std::vector<posting>;

namespace detail {

    inline void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v) {
        while (v >= 0x80) {
            out.push_back(static_cast<std::uint8_t>(v | 0x80));
            v >>= 7;
        }
        out.push_back(static_cast<std::uint8_t>(v));
    }

    /// Bounds-checked varint read; returns false on overrun or overlong encoding.
    inline bool get_varint(std::uint8_t const*& p, std::uint8_t const* end, std::uint64_t& v) {
        v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            if (p == end) {
                return false;
            }
            std::uint8_t b = *p++;
            v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
            if ((b & 0x80) == 0) {
                return true;
            }
        }
        return false;
    }

    inline void put_bytes(std::vector<std::uint8_t>& out, std::string_view s) {
        put_varint(out, s.size());
        out.insert(out.end(), s.begin(), s.end());
    }

    inline bool get_bytes(std::uint8_t const*& p, std::uint8_t const* end, std::string& s) {
        std::uint64_t len = 0;
        if (!get_varint(p, end, len) || len > static_cast<std::uint64_t>(end - p)) {
            return false;
        }
        s.assign(reinterpret_cast<char const*>(p), len);
        p += len;
        return true;
    }

    /// Encodes a posting list as (doc gap, tf) varint pairs; the first gap is from 0.
    inline void encode_postings(std::vector<std::uint8_t>& out, std::span<posting const> list) {
        std::uint32_t prev = 0;
        for (auto const& p : list) {
            put_varint(out, p.doc - prev);
            put_varint(out, p.tf);
            prev = p.doc;
        }
    }

}  // namespace detail

/// Forward iterator over an encoded posting list.
class posting_cursor {
  public:
    posting_cursor() = default;
    posting_cursor(std::uint8_t const* begin, std::uint8_t const* end) : m_pos(begin), m_end(end) {
        next();
    }

    [[nodiscard]] bool valid() const { return m_valid; }
    [[nodiscard]] posting const& operator*() const { return m_current; }
    [[nodiscard]] posting const* operator->() const { return &m_current; }

    void next() {
        if (m_pos == m_end) {
            m_valid = false;
            return;
        }
        std::uint64_t gap = 0;
        std::uint64_t tf = 0;
        detail::get_varint(m_pos, m_end, gap);
        detail::get_varint(m_pos, m_end, tf);
        m_current.doc += static_cast<std::uint32_t>(gap);
        m_current.tf = static_cast<std::uint32_t>(tf);
        m_valid = true;
    }

  private:
    std::uint8_t const* m_pos = nullptr;
    std::uint8_t const* m_end = nullptr;
    posting m_current{};
    bool m_valid = false;
};

class index_builder;

/// Immutable inverted index: sorted lexicon, per-term statistics, compressed
/// postings and the document table. Safe to share across threads once built.
class inverted_index {
  public:
    using term_id = std::uint32_t;

    [[nodiscard]] collection_stats const& stats() const { return m_stats; }
    [[nodiscard]] gir::analyzer const& analyzer() const { return m_analyzer; }

    [[nodiscard]] std::optional<term_id> find_term(std::string_view term) const {
        auto it = std::lower_bound(m_terms.begin(), m_terms.end(), term);
        if (it == m_terms.end() || *it != term) {
            return std::nullopt;
        }
        return static_cast<term_id>(it - m_terms.begin());
    }

    [[nodiscard]] std::optional<term_stats> term(std::string_view term) const {
        auto id = find_term(term);
        if (!id) {
            return std::nullopt;
        }
        return m_term_stats[*id];
    }

    [[nodiscard]] term_stats const& stats_of(term_id id) const { return m_term_stats[id]; }

    [[nodiscard]] posting_cursor cursor(term_id id) const {
        auto const* base = m_postings.data();
        return posting_cursor(base + m_offsets[id], base + m_offsets[id + 1]);
    }

    /// Statistics and decoded postings of `term`, or nothing for an unknown term.
    [[nodiscard]] std::optional<std::pair<term_stats, posting_list>> postings(std::string_view term) const {
        auto id = find_term(term);
        if (!id) {
            return std::nullopt;
        }
        posting_list list;
        list.reserve(m_term_stats[*id].df);
        for (auto c = cursor(*id); c.valid(); c.next()) {
            list.push_back(*c);
        }
        return std::make_pair(m_term_stats[*id], std::move(list));
    }

    [[nodiscard]] std::vector<std::string> const& terms() const { return m_terms; }
    [[nodiscard]] std::size_t num_docs() const { return m_docnos.size(); }
    [[nodiscard]] std::string const& docno(std::uint32_t doc) const { return m_docnos[doc]; }
    [[nodiscard]] std::uint32_t doc_length(std::uint32_t doc) const { return m_doc_lengths[doc]; }

    [[nodiscard]] std::optional<std::uint32_t> find_doc(std::string_view docno) const {
        auto it = m_doc_ids.find(std::string(docno));
        if (it == m_doc_ids.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    /// Recomputes every invariant from the raw data. Throws `index_error(corrupt)`.
    void check_invariants() const {
        auto fail = [](std::string const& what) {
            throw index_error(index_error_kind::corrupt, what);
        };
        if (m_docnos.empty()) {
            fail("index has no documents");
        }
        if (m_doc_lengths.size() != m_docnos.size() || m_stats.num_docs != m_docnos.size()) {
            fail("document table size mismatch");
        }
        if (m_terms.size() != m_term_stats.size() || m_offsets.size() != m_terms.size() + 1
            || m_stats.vocab_size != m_terms.size()) {
            fail("lexicon size mismatch");
        }
        std::uint64_t total = 0;
        for (auto l : m_doc_lengths) {
            total += l;
        }
        if (total != m_stats.total_tokens) {
            fail("document lengths do not sum to the token count");
        }
        if (m_offsets.front() != 0 || m_offsets.back() != m_postings.size()) {
            fail("postings extent mismatch");
        }
        std::uint64_t cf_total = 0;
        for (std::size_t t = 0; t < m_terms.size(); ++t) {
            if (t > 0 && !(m_terms[t - 1] < m_terms[t])) {
                fail("lexicon not strictly sorted");
            }
            if (m_offsets[t] > m_offsets[t + 1]) {
                fail("postings offsets not monotone");
            }
            auto const* p = m_postings.data() + m_offsets[t];
            auto const* end = m_postings.data() + m_offsets[t + 1];
            std::uint64_t df = 0;
            std::uint64_t cf = 0;
            std::uint64_t doc = 0;
            while (p != end) {
                std::uint64_t gap = 0;
                std::uint64_t tf = 0;
                if (!detail::get_varint(p, end, gap) || !detail::get_varint(p, end, tf)) {
                    fail("truncated posting list for term " + m_terms[t]);
                }
                if ((df > 0 && gap == 0) || tf == 0) {
                    fail("invalid posting in list for term " + m_terms[t]);
                }
                doc += gap;
                if (doc >= m_docnos.size() || tf > m_doc_lengths[doc]) {
                    fail("posting out of range for term " + m_terms[t]);
                }
                ++df;
                cf += tf;
            }
            if (df != m_term_stats[t].df || cf != m_term_stats[t].cf || df == 0) {
                fail("term statistics disagree with postings for term " + m_terms[t]);
            }
            cf_total += cf;
        }
        if (cf_total != m_stats.total_tokens) {
            fail("collection frequencies do not sum to the token count");
        }
    }

    friend class index_builder;
    friend inverted_index load_index(std::filesystem::path const& dir);
    friend void save_index(inverted_index const& index, std::filesystem::path const& dir);

  private:
    void finalize_docs() {
        m_doc_ids.clear();
        m_doc_ids.reserve(m_docnos.size());
        for (std::uint32_t d = 0; d < m_docnos.size(); ++d) {
            m_doc_ids.emplace(m_docnos[d], d);
        }
        m_stats.num_docs = m_docnos.size();
        m_stats.vocab_size = m_terms.size();
    }

    collection_stats m_stats;
    gir::analyzer m_analyzer;
    std::vector<std::string> m_terms;
    std::vector<term_stats> m_term_stats;
    std::vector<std::uint64_t> m_offsets{0};
    std::vector<std::uint8_t> m_postings;
    std::vector<std::string> m_docnos;
    std::vector<std::uint32_t> m_doc_lengths;
    std::unordered_map<std::string, std::uint32_t> m_doc_ids;
};

struct build_options {
    /// Documents buffered in memory before a segment is spilled to disk.
    std::size_t segment_docs = 50000;
    /// Threads used to tokenize a batch of documents.
    std::size_t workers = 1;
    /// Directory for spilled segments; a private temporary directory when empty.
    std::filesystem::path spill_dir;
};

namespace detail {

    /// Sequential reader over a spilled segment file.
    class segment_reader {
      public:
        explicit segment_reader(std::filesystem::path const& path)
            : m_in(path, std::ios::binary) {
            if (!m_in) {
                throw index_error(index_error_kind::io, "cannot open segment " + path.string());
            }
            m_remaining = read_varint();
            advance();
        }

        [[nodiscard]] bool valid() const { return m_valid; }
        [[nodiscard]] std::string const& term() const { return m_term; }
        [[nodiscard]] posting_list const& postings() const { return m_postings; }

        void advance() {
            if (m_remaining == 0) {
                m_valid = false;
                return;
            }
            --m_remaining;
            auto len = read_varint();
            m_term.resize(len);
            m_in.read(m_term.data(), static_cast<std::streamsize>(len));
            auto df = read_varint();
            m_postings.resize(df);
            std::uint32_t doc = 0;
            for (auto& p : m_postings) {
                doc += static_cast<std::uint32_t>(read_varint());
                p.doc = doc;
                p.tf = static_cast<std::uint32_t>(read_varint());
            }
            if (!m_in) {
                throw index_error(index_error_kind::io, "short read from spilled segment");
            }
            m_valid = true;
        }

      private:
        std::uint64_t read_varint() {
            std::uint64_t v = 0;
            for (int shift = 0; shift < 64; shift += 7) {
                int c = m_in.get();
                if (c == std::char_traits<char>::eof()) {
                    throw index_error(index_error_kind::io, "short read from spilled segment");
                }
                v |= static_cast<std::uint64_t>(c & 0x7F) << shift;
                if ((c & 0x80) == 0) {
                    break;
                }
            }
            return v;
        }

        std::ifstream m_in;
        std::uint64_t m_remaining = 0;
        std::string m_term;
        posting_list m_postings;
        bool m_valid = false;
    };

}  // namespace detail

/// Accumulates documents into in-memory segments, spills full segments to disk and
/// merges them at finish(). The result does not depend on segment size or worker
/// count: docids follow ingestion order and segments are merged in that order.
class index_builder {
  public:
    explicit index_builder(gir::analyzer an = {}, build_options opts = {})
        : m_opts(std::move(opts)) {
        m_index.m_analyzer = std::move(an);
        if (m_opts.segment_docs == 0) {
            m_opts.segment_docs = 1;
        }
        if (m_opts.workers == 0) {
            m_opts.workers = 1;
        }
    }

    index_builder(index_builder const&) = delete;
    index_builder& operator=(index_builder const&) = delete;

    ~index_builder() { cleanup(); }

    void add(raw_document const& doc) { add_batch(std::span<raw_document const>(&doc, 1)); }

    /// Tokenizes the batch (in parallel when workers > 1) and appends it in order.
    void add_batch(std::span<raw_document const> docs) {
        std::vector<analyzed_doc> analyzed(docs.size());
        auto work = [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                analyzed[i] = analyze(docs[i]);
            }
        };
        std::size_t workers = std::min(m_opts.workers, docs.size());
        if (workers <= 1) {
            work(0, docs.size());
        } else {
            std::vector<std::thread> threads;
            std::size_t chunk = (docs.size() + workers - 1) / workers;
            for (std::size_t w = 0; w < workers; ++w) {
                std::size_t begin = w * chunk;
                std::size_t end = std::min(docs.size(), begin + chunk);
                if (begin < end) {
                    threads.emplace_back(work, begin, end);
                }
            }
            for (auto& t : threads) {
                t.join();
            }
        }
        for (std::size_t i = 0; i < docs.size(); ++i) {
            append(docs[i].docno, analyzed[i]);
        }
    }

    /// Finalizes the index. Throws on an empty collection.
    inverted_index finish() {
        if (m_index.m_docnos.empty()) {
            throw error("cannot build an index from zero documents");
        }
        if (m_segments.empty()) {
            encode_memory_segment();
        } else {
            if (!m_segment.empty()) {
                spill();
            }
            merge_segments();
        }
        m_index.finalize_docs();
        cleanup();
        m_index.check_invariants();
        return std::move(m_index);
    }

    [[nodiscard]] std::size_t spilled_segments() const { return m_segments.size(); }

  private:
    struct analyzed_doc {
        std::vector<std::pair<std::string, std::uint32_t>> terms;
        std::uint32_t length = 0;
    };

    analyzed_doc analyze(raw_document const& doc) const {
        std::unordered_map<std::string, std::uint32_t> counts;
        analyzed_doc out;
        m_index.m_analyzer.for_each_term(doc.text, [&](std::string_view term) {
            ++counts[std::string(term)];
            ++out.length;
        });
        out.terms.assign(counts.begin(), counts.end());
        return out;
    }

    void append(std::string const& docno, analyzed_doc const& doc) {
        if (!m_docnos_seen.emplace(docno).second) {
            throw error("duplicate docno " + docno);
        }
        auto id = static_cast<std::uint32_t>(m_index.m_docnos.size());
        m_index.m_docnos.push_back(docno);
        m_index.m_doc_lengths.push_back(doc.length);
        m_index.m_stats.total_tokens += doc.length;
        for (auto const& [term, tf] : doc.terms) {
            m_segment[term].push_back(posting{id, tf});
        }
        if (++m_segment_docs >= m_opts.segment_docs) {
            spill();
        }
    }

    std::vector<std::pair<std::string const*, posting_list const*>> sorted_segment() const {
        std::vector<std::pair<std::string const*, posting_list const*>> entries;
        entries.reserve(m_segment.size());
        for (auto const& [term, list] : m_segment) {
            entries.emplace_back(&term, &list);
        }
        std::sort(entries.begin(), entries.end(),
                  [](auto const& a, auto const& b) { return *a.first < *b.first; });
        return entries;
    }

    void add_term(std::string term, std::span<posting const> list) {
        term_stats ts;
        ts.df = list.size();
        for (auto const& p : list) {
            ts.cf += p.tf;
        }
        detail::encode_postings(m_index.m_postings, list);
        m_index.m_terms.push_back(std::move(term));
        m_index.m_term_stats.push_back(ts);
        m_index.m_offsets.push_back(m_index.m_postings.size());
    }

    void encode_memory_segment() {
        for (auto const& [term, list] : sorted_segment()) {
            add_term(*term, *list);
        }
        m_segment.clear();
    }

    void spill() {
        if (m_segment.empty()) {
            m_segment_docs = 0;
            return;
        }
        if (m_spill_root.empty()) {
            if (m_opts.spill_dir.empty()) {
                auto templ = (std::filesystem::temp_directory_path() / "gir-spill-XXXXXX").string();
                if (::mkdtemp(templ.data()) == nullptr) {
                    throw index_error(index_error_kind::io, "cannot create spill directory");
                }
                m_spill_root = templ;
                m_owns_spill_root = true;
            } else {
                std::filesystem::create_directories(m_opts.spill_dir);
                m_spill_root = m_opts.spill_dir;
            }
        }
        auto path = m_spill_root / ("segment-" + std::to_string(m_segments.size()) + ".seg");
        std::vector<std::uint8_t> buf;
        auto entries = sorted_segment();
        detail::put_varint(buf, entries.size());
        for (auto const& [term, list] : entries) {
            detail::put_bytes(buf, *term);
            detail::put_varint(buf, list->size());
            detail::encode_postings(buf, *list);
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<char const*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!out) {
            throw index_error(index_error_kind::io, "cannot write segment " + path.string());
        }
        m_segments.push_back(path);
        m_segment.clear();
        m_segment_docs = 0;
    }

    void merge_segments() {
        std::vector<detail::segment_reader> readers;
        readers.reserve(m_segments.size());
        for (auto const& path : m_segments) {
            readers.emplace_back(path);
        }
        // (term, segment) min-heap; equal terms pop in segment order, which is docid order.
        using item = std::pair<std::string, std::size_t>;
        std::priority_queue<item, std::vector<item>, std::greater<>> heap;
        for (std::size_t s = 0; s < readers.size(); ++s) {
            if (readers[s].valid()) {
                heap.emplace(readers[s].term(), s);
            }
        }
        posting_list merged;
        while (!heap.empty()) {
            std::string term = heap.top().first;
            merged.clear();
            while (!heap.empty() && heap.top().first == term) {
                auto s = heap.top().second;
                heap.pop();
                auto const& list = readers[s].postings();
                merged.insert(merged.end(), list.begin(), list.end());
                readers[s].advance();
                if (readers[s].valid()) {
                    heap.emplace(readers[s].term(), s);
                }
            }
            add_term(std::move(term), merged);
        }
    }

    void cleanup() {
        std::error_code ec;
        for (auto const& path : m_segments) {
            std::filesystem::remove(path, ec);
        }
        m_segments.clear();
        if (m_owns_spill_root) {
            std::filesystem::remove_all(m_spill_root, ec);
            m_owns_spill_root = false;
        }
        m_spill_root.clear();
    }

    build_options m_opts;
    inverted_index m_index;
    std::unordered_map<std::string, posting_list> m_segment;
    std::size_t m_segment_docs = 0;
    std::unordered_set<std::string> m_docnos_seen;
    std::vector<std::filesystem::path> m_segments;
    std::filesystem::path m_spill_root;
    bool m_owns_spill_root = false;
};

inline inverted_index build_index(std::span<raw_document const> docs, analyzer an = {},
                                  build_options opts = {}) {
    index_builder builder(std::move(an), std::move(opts));
    builder.add_batch(docs);
    return builder.finish();
}

// On-disk layout: a directory of checksummed binary files plus stats.txt.
// Each binary file is: magic[8] | version u32 | kind u32 | payload length u64 |
// payload | crc32 u32 (over everything before it). Integers are little-endian.

inline constexpr std::uint32_t index_format_version = 1;

namespace detail {

    inline constexpr std::array<char, 8> index_magic = {'G', 'I', 'R', 'I', 'N', 'D', 'E', 'X'};
    inline constexpr std::size_t file_header_size = 24;

    enum class index_file : std::uint32_t { meta = 1, doctable = 2, lexicon = 3, postings = 4 };

    inline char const* file_name(index_file kind) {
        switch (kind) {
        case index_file::meta: return "meta.gir";
        case index_file::doctable: return "doctable.gir";
        case index_file::lexicon: return "lexicon.gir";
        case index_file::postings: return "postings.gir";
        }
        return "";
    }

    template <typename Int>
    void put_le(std::vector<std::uint8_t>& out, Int v) {
        for (std::size_t i = 0; i < sizeof(Int); ++i) {
            out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
        }
    }

    template <typename Int>
    Int get_le(std::uint8_t const* p) {
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(Int); ++i) {
            v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        }
        return static_cast<Int>(v);
    }

    inline std::uint32_t crc32_of(std::span<std::uint8_t const> bytes) {
        uLong crc = ::crc32(0L, Z_NULL, 0);
        std::size_t done = 0;
        while (done < bytes.size()) {
            auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1U << 30));
            crc = ::crc32(crc, bytes.data() + done, n);
            done += n;
        }
        return static_cast<std::uint32_t>(crc);
    }

    inline std::vector<std::uint8_t> frame(index_file kind, std::span<std::uint8_t const> payload,
                                           std::uint32_t version = index_format_version) {
        std::vector<std::uint8_t> out;
        out.reserve(file_header_size + payload.size() + 4);
        out.insert(out.end(), index_magic.begin(), index_magic.end());
        put_le<std::uint32_t>(out, version);
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kind));
        put_le<std::uint64_t>(out, payload.size());
        out.insert(out.end(), payload.begin(), payload.end());
        put_le<std::uint32_t>(out, crc32_of(out));
        return out;
    }

    inline void write_file(std::filesystem::path const& path, std::span<std::uint8_t const> bytes) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<char const*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw index_error(index_error_kind::io, "cannot write " + path.string());
        }
    }

    /// Reads and verifies one framed file, returning its payload.
    inline std::vector<std::uint8_t> read_framed(std::filesystem::path const& dir, index_file kind) {
        auto path = dir / file_name(kind);
        std::error_code ec;
        if (!std::filesystem::is_regular_file(path, ec)) {
            throw index_error(index_error_kind::missing, path.string());
        }
        std::ifstream in(path, std::ios::binary);
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        if (!in.eof() && in.fail()) {
            throw index_error(index_error_kind::io, "cannot read " + path.string());
        }
        auto name = path.filename().string();
        if (bytes.size() < file_header_size + 4) {
            throw index_error(index_error_kind::truncated, name + " is shorter than its header");
        }
        auto declared = get_le<std::uint64_t>(bytes.data() + 16);
        if (declared != bytes.size() - file_header_size - 4) {
            throw index_error(index_error_kind::truncated,
                              name + " declares " + std::to_string(declared) + " payload bytes, has "
                                  + std::to_string(bytes.size() - file_header_size - 4));
        }
        auto stored = get_le<std::uint32_t>(bytes.data() + bytes.size() - 4);
        if (crc32_of(std::span(bytes).first(bytes.size() - 4)) != stored) {
            throw index_error(index_error_kind::checksum, name);
        }
        if (!std::equal(index_magic.begin(), index_magic.end(), bytes.begin())) {
            throw index_error(index_error_kind::bad_format, name + " has no index magic");
        }
        auto version = get_le<std::uint32_t>(bytes.data() + 8);
        if (version != index_format_version) {
            throw index_error(index_error_kind::version_mismatch,
                              name + " has version " + std::to_string(version) + ", expected "
                                  + std::to_string(index_format_version));
        }
        if (get_le<std::uint32_t>(bytes.data() + 12) != static_cast<std::uint32_t>(kind)) {
            throw index_error(index_error_kind::bad_format, name + " has the wrong file kind");
        }
        return std::vector<std::uint8_t>(bytes.begin() + file_header_size, bytes.end() - 4);
    }

    inline std::string format_double(double v) {
        std::ostringstream os;
        os.imbue(std::locale::classic());
        os.precision(17);
        os << v;
        return os.str();
    }

}  // namespace detail

/// Human-readable key=value summary of the collection statistics.
inline std::string stats_summary(collection_stats const& s) {
    return "num_docs=" + std::to_string(s.num_docs) + "\ntotal_tokens="
        + std::to_string(s.total_tokens) + "\navg_doc_len=" + detail::format_double(s.avg_doc_len())
        + "\nvocab_size=" + std::to_string(s.vocab_size) + "\n";
}

inline void save_index(inverted_index const& index, std::filesystem::path const& dir) {
    using detail::index_file;
    std::filesystem::create_directories(dir);

    std::vector<std::uint8_t> meta;
    detail::put_varint(meta, index.m_stats.num_docs);
    detail::put_varint(meta, index.m_stats.total_tokens);
    detail::put_varint(meta, index.m_stats.vocab_size);
    detail::put_varint(meta, index.m_analyzer.stopwords().size());
    for (auto const& w : index.m_analyzer.stopwords()) {
        detail::put_bytes(meta, w);
    }

    std::vector<std::uint8_t> docs;
    detail::put_varint(docs, index.m_docnos.size());
    for (std::size_t d = 0; d < index.m_docnos.size(); ++d) {
        detail::put_bytes(docs, index.m_docnos[d]);
        detail::put_varint(docs, index.m_doc_lengths[d]);
    }

    std::vector<std::uint8_t> lexicon;
    detail::put_varint(lexicon, index.m_terms.size());
    for (std::size_t t = 0; t < index.m_terms.size(); ++t) {
        detail::put_bytes(lexicon, index.m_terms[t]);
        detail::put_varint(lexicon, index.m_term_stats[t].df);
        detail::put_varint(lexicon, index.m_term_stats[t].cf);
        detail::put_varint(lexicon, index.m_offsets[t + 1] - index.m_offsets[t]);
    }

    detail::write_file(dir / detail::file_name(index_file::meta), detail::frame(index_file::meta, meta));
    detail::write_file(dir / detail::file_name(index_file::doctable),
                       detail::frame(index_file::doctable, docs));
    detail::write_file(dir / detail::file_name(index_file::lexicon),
                       detail::frame(index_file::lexicon, lexicon));
    detail::write_file(dir / detail::file_name(index_file::postings),
                       detail::frame(index_file::postings, index.m_postings));

    std::ofstream summary(dir / "stats.txt", std::ios::trunc);
    summary << stats_summary(index.m_stats);
    if (!summary) {
        throw index_error(index_error_kind::io, "cannot write stats.txt");
    }
}

/// Loads an index written by save_index. Every file is checksummed and the decoded
/// structure is re-validated before the index is returned.
inline inverted_index load_index(std::filesystem::path const& dir) {
    using detail::index_file;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw index_error(index_error_kind::missing, dir.string() + " is not a directory");
    }
    auto meta = detail::read_framed(dir, index_file::meta);
    auto docs = detail::read_framed(dir, index_file::doctable);
    auto lexicon = detail::read_framed(dir, index_file::lexicon);
    auto postings = detail::read_framed(dir, index_file::postings);

    auto corrupt = [](char const* what) { throw index_error(index_error_kind::corrupt, what); };
    inverted_index index;

    {
        auto const* p = meta.data();
        auto const* end = p + meta.size();
        std::uint64_t n_stop = 0;
        if (!detail::get_varint(p, end, index.m_stats.num_docs)
            || !detail::get_varint(p, end, index.m_stats.total_tokens)
            || !detail::get_varint(p, end, index.m_stats.vocab_size)
            || !detail::get_varint(p, end, n_stop)) {
            corrupt("meta.gir");
        }
        std::set<std::string, std::less<>> stop;
        for (std::uint64_t i = 0; i < n_stop; ++i) {
            std::string w;
            if (!detail::get_bytes(p, end, w)) {
                corrupt("meta.gir stoplist");
            }
            stop.insert(std::move(w));
        }
        if (p != end) {
            corrupt("meta.gir trailing bytes");
        }
        index.m_analyzer = analyzer(std::move(stop));
    }
    {
        auto const* p = docs.data();
        auto const* end = p + docs.size();
        std::uint64_t n = 0;
        if (!detail::get_varint(p, end, n) || n > docs.size()) {
            corrupt("doctable.gir");
        }
        index.m_docnos.resize(n);
        index.m_doc_lengths.resize(n);
        for (std::uint64_t d = 0; d < n; ++d) {
            std::uint64_t len = 0;
            if (!detail::get_bytes(p, end, index.m_docnos[d]) || !detail::get_varint(p, end, len)
                || len > UINT32_MAX) {
                corrupt("doctable.gir entry");
            }
            index.m_doc_lengths[d] = static_cast<std::uint32_t>(len);
        }
        if (p != end) {
            corrupt("doctable.gir trailing bytes");
        }
    }
    {
        auto const* p = lexicon.data();
        auto const* end = p + lexicon.size();
        std::uint64_t n = 0;
        if (!detail::get_varint(p, end, n) || n > lexicon.size()) {
            corrupt("lexicon.gir");
        }
        index.m_terms.resize(n);
        index.m_term_stats.resize(n);
        index.m_offsets.assign(1, 0);
        index.m_offsets.reserve(n + 1);
        for (std::uint64_t t = 0; t < n; ++t) {
            std::uint64_t bytes = 0;
            if (!detail::get_bytes(p, end, index.m_terms[t])
                || !detail::get_varint(p, end, index.m_term_stats[t].df)
                || !detail::get_varint(p, end, index.m_term_stats[t].cf)
                || !detail::get_varint(p, end, bytes) || bytes > postings.size()) {
                corrupt("lexicon.gir entry");
            }
            index.m_offsets.push_back(index.m_offsets.back() + bytes);
        }
        if (p != end) {
            corrupt("lexicon.gir trailing bytes");
        }
    }
    index.m_postings = std::move(postings);
    auto declared = index.m_stats;
    index.finalize_docs();
    if (!(declared == index.m_stats) || index.m_doc_ids.size() != index.m_docnos.size()) {
        corrupt("statistics disagree with document table or lexicon");
    }
    index.check_invariants();
    return index;
}

}  // namespace gir
