#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gir/trec_io.hpp"
#include "gir/utf8.hpp"

namespace gir::synthetic {

/// Parameters of a generated test collection. Everything derives from `seed`, and the
/// generator avoids std:: distributions so output is identical across standard libraries.
struct collection_config {
    std::size_t num_docs = 10000;
    std::size_t vocab_size = 20000;
    double zipf_exponent = 1.0;
    std::size_t min_doc_len = 50;
    std::size_t max_doc_len = 150;  ///< lengths are uniform in [min, max], mean 100 by default
    std::size_t num_topics = 25;
    std::size_t relevant_per_topic = 20;
    std::size_t nonrelevant_per_topic = 40;
    std::uint64_t seed = 2011;
};

struct collection {
    std::vector<raw_document> docs;
    std::vector<topic> topics;
    qrels judgments;
};

class rng {
  public:
    explicit rng(std::uint64_t seed) : m_engine(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi].
    std::size_t between(std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
    }

  private:
    std::mt19937_64 m_engine;
};

/// Samples ranks 0..n-1 with probability proportional to 1/(rank+1)^s.
class zipf_sampler {
  public:
    zipf_sampler(std::size_t n, double s) : m_cdf(n) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += 1.0 / std::pow(static_cast<double>(i + 1), s);
            m_cdf[i] = total;
        }
        for (auto& v : m_cdf) {
            v /= total;
        }
    }

    std::size_t operator()(rng& r) const {
        auto it = std::upper_bound(m_cdf.begin(), m_cdf.end(), r.uniform());
        return std::min(static_cast<std::size_t>(it - m_cdf.begin()), m_cdf.size() - 1);
    }

  private:
    std::vector<double> m_cdf;
};

/// The i-th vocabulary word: Gujarati syllables (consonant plus optional vowel sign)
/// spelling i in mixed radix. Distinct for distinct i, always at least two syllables.
inline std::string gujarati_word(std::size_t i) {
    static constexpr char32_t consonants[] = {
        0x0A95, 0x0A96, 0x0A97, 0x0A98, 0x0A99, 0x0A9A, 0x0A9B, 0x0A9C, 0x0A9D, 0x0A9E, 0x0A9F,
        0x0AA0, 0x0AA1, 0x0AA2, 0x0AA3, 0x0AA4, 0x0AA5, 0x0AA6, 0x0AA7, 0x0AA8, 0x0AAA, 0x0AAB,
        0x0AAC, 0x0AAD, 0x0AAE, 0x0AAF, 0x0AB0, 0x0AB2, 0x0AB3, 0x0AB5, 0x0AB6, 0x0AB7, 0x0AB8,
        0x0AB9};
    static constexpr char32_t signs[] = {0, 0x0ABE, 0x0ABF, 0x0AC0, 0x0AC1, 0x0AC7, 0x0ACB};
    constexpr std::size_t nc = std::size(consonants);
    constexpr std::size_t ns = std::size(signs);
    constexpr std::size_t radix = nc * ns;

    std::string word;
    std::size_t v = i + radix;
    while (v > 0) {
        std::size_t digit = v % radix;
        v /= radix;
        utf8::append(word, consonants[digit / ns]);
        if (char32_t sign = signs[digit % ns]; sign != 0) {
            utf8::append(word, sign);
        }
    }
    return word;
}

inline std::string docno(std::size_t i) {
    std::string n = std::to_string(i + 1);
    return "GS-" + std::string(n.size() < 6 ? 6 - n.size() : 0, '0') + n;
}

/// Zipfian newswire-like corpus with topics whose key terms are planted in the
/// relevant documents. Judged non-relevant documents are drawn at random.
inline collection generate(collection_config const& cfg = {}) {
    rng r(cfg.seed);
    zipf_sampler zipf(cfg.vocab_size, cfg.zipf_exponent);
    std::vector<std::string> vocab(cfg.vocab_size);
    for (std::size_t i = 0; i < cfg.vocab_size; ++i) {
        vocab[i] = gujarati_word(i);
    }

    collection out;

    // Key terms come from a mid-frequency band and are unique per topic.
    std::size_t band_lo = std::min<std::size_t>(200, cfg.vocab_size / 4);
    std::size_t band_hi = std::max(band_lo + 3 * cfg.num_topics, std::min<std::size_t>(2000, cfg.vocab_size - 1));
    std::vector<std::size_t> band;
    for (std::size_t i = band_lo; i <= band_hi && i < cfg.vocab_size; ++i) {
        band.push_back(i);
    }
    for (std::size_t i = band.size(); i > 1; --i) {
        std::swap(band[i - 1], band[r.between(0, i - 1)]);
    }

    struct plan {
        std::vector<std::size_t> keys;
        std::vector<std::size_t> relevant;
    };
    std::vector<plan> plans(cfg.num_topics);
    std::vector<std::vector<std::size_t>> planted(cfg.num_docs);
    for (std::size_t t = 0; t < cfg.num_topics; ++t) {
        auto& p = plans[t];
        p.keys = {band[3 * t], band[3 * t + 1], band[3 * t + 2]};
        while (p.relevant.size() < std::min(cfg.relevant_per_topic, cfg.num_docs)) {
            auto d = r.between(0, cfg.num_docs - 1);
            if (std::find(p.relevant.begin(), p.relevant.end(), d) == p.relevant.end()) {
                p.relevant.push_back(d);
                planted[d].push_back(t);
            }
        }
    }

    out.docs.reserve(cfg.num_docs);
    for (std::size_t d = 0; d < cfg.num_docs; ++d) {
        std::size_t len = r.between(cfg.min_doc_len, cfg.max_doc_len);
        std::vector<std::string const*> words;
        words.reserve(len + 8);
        for (std::size_t i = 0; i < len; ++i) {
            words.push_back(&vocab[zipf(r)]);
        }
        for (auto t : planted[d]) {
            for (auto key : plans[t].keys) {
                auto copies = r.between(1, 3);
                for (std::size_t c = 0; c < copies; ++c) {
                    words[r.between(0, words.size() - 1)] = &vocab[key];
                }
            }
        }
        std::string text;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i > 0) {
                text += (i % 12 == 0) ? ", " : " ";
            }
            text += *words[i];
        }
        text += ".";
        out.docs.push_back(raw_document{docno(d), std::move(text)});
    }

    for (std::size_t t = 0; t < cfg.num_topics; ++t) {
        auto const& p = plans[t];
        auto filler = [&](std::size_t n) {
            std::string s;
            for (std::size_t i = 0; i < n; ++i) {
                s += " " + vocab[zipf(r)];
            }
            return s;
        };
        topic tp;
        tp.num = std::to_string(126 + t);
        tp.title = vocab[p.keys[0]] + " " + vocab[p.keys[1]] + ".";
        tp.desc = vocab[p.keys[0]] + " " + vocab[p.keys[2]] + filler(4) + ".";
        tp.narr = vocab[p.keys[1]] + " " + vocab[p.keys[2]] + filler(8) + ".";
        out.topics.push_back(std::move(tp));

        auto const& num = out.topics.back().num;
        for (auto d : p.relevant) {
            out.judgments.add(num, docno(d), r.uniform() < 0.25 ? 2 : 1);
        }
        std::size_t judged = 0;
        std::size_t attempts = 0;
        while (judged < cfg.nonrelevant_per_topic && attempts++ < 100 * cfg.nonrelevant_per_topic) {
            auto d = r.between(0, cfg.num_docs - 1);
            if (std::find(p.relevant.begin(), p.relevant.end(), d) == p.relevant.end()
                && !out.judgments.grade(num, docno(d))) {
                out.judgments.add(num, docno(d), 0);
                ++judged;
            }
        }
    }
    return out;
}

}  // namespace gir::synthetic
