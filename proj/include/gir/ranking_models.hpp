#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gir/error.hpp"

namespace gir {

enum class model_id {
    BB2,
    BM25,
    DFI0,
    DFR_BM25,
    DFRee,
    DLH,
    DLH13,
    DPH,
    Hiemstra_LM,
    IFB2,
    In_expC2,
    InL2,
    Js_KLs,
    LGD,
    PL2,
    TF_IDF,
    XSqrA_M,
};

inline constexpr std::size_t model_count = 17;

namespace detail {
    inline constexpr std::array<std::pair<model_id, std::string_view>, model_count> model_names{{
        {model_id::BB2, "BB2"},
        {model_id::BM25, "BM25"},
        {model_id::DFI0, "DFI0"},
        {model_id::DFR_BM25, "DFR_BM25"},
        {model_id::DFRee, "DFRee"},
        {model_id::DLH, "DLH"},
        {model_id::DLH13, "DLH13"},
        {model_id::DPH, "DPH"},
        {model_id::Hiemstra_LM, "Hiemstra_LM"},
        {model_id::IFB2, "IFB2"},
        {model_id::In_expC2, "In_expC2"},
        {model_id::InL2, "InL2"},
        {model_id::Js_KLs, "Js_KLs"},
        {model_id::LGD, "LGD"},
        {model_id::PL2, "PL2"},
        {model_id::TF_IDF, "TF_IDF"},
        {model_id::XSqrA_M, "XSqrA_M"},
    }};
}  // namespace detail

inline std::string_view to_string(model_id id) {
    for (auto const& [m, name] : detail::model_names) {
        if (m == id) {
            return name;
        }
    }
    return "?";
}

/// Exact, case-sensitive lookup of a model name.
inline std::optional<model_id> parse_model_id(std::string_view name) {
    for (auto const& [m, n] : detail::model_names) {
        if (n == name) {
            return m;
        }
    }
    return std::nullopt;
}

/// All registered models, sorted by name (byte order).
inline std::vector<model_id> list_models() {
    std::vector<model_id> ids;
    for (auto const& [m, _] : detail::model_names) {
        ids.push_back(m);
    }
    std::sort(ids.begin(), ids.end(),
              [](model_id a, model_id b) { return to_string(a) < to_string(b); });
    return ids;
}

inline std::string model_list_string() {
    std::string out;
    for (auto id : list_models()) {
        if (!out.empty()) {
            out += ", ";
        }
        out += to_string(id);
    }
    return out;
}

/// Models whose scores ignore model_params entirely.
inline bool is_parameter_free(model_id id) {
    switch (id) {
    case model_id::DPH:
    case model_id::DLH:
    case model_id::DLH13:
    case model_id::DFRee:
    case model_id::DFI0:
    case model_id::Js_KLs:
    case model_id::XSqrA_M: return true;
    default: return false;
    }
}

/// Statistics for one (query term, document) pair.
struct model_inputs {
    double tf = 0;           ///< occurrences of the term in the document
    double qtf = 1;          ///< occurrences of the term in the query
    double doc_len = 0;      ///< document length in tokens
    double avg_doc_len = 0;  ///< average document length
    double num_docs = 0;     ///< N
    double total_tokens = 0; ///< token count of the collection
    double df = 0;           ///< documents containing the term
    double cf = 0;           ///< occurrences of the term in the collection
};

struct model_params {
    double c = 1.0;
    double k1 = 1.2;
    double b = 0.75;
    double k3 = 8.0;
    double lambda = 0.15;

    /// Sets a parameter by name (c, k1, b, k3, lambda). Returns false for an unknown key.
    bool set(std::string_view key, double value) {
        if (key == "c") {
            c = value;
        } else if (key == "k1") {
            k1 = value;
        } else if (key == "b") {
            b = value;
        } else if (key == "k3") {
            k3 = value;
        } else if (key == "lambda") {
            lambda = value;
        } else {
            return false;
        }
        return true;
    }

    bool operator==(model_params const&) const = default;
};

inline void validate(model_params const& p) {
    if (!(p.c > 0) || !(p.k1 > 0) || !(p.b >= 0 && p.b <= 1) || !(p.k3 >= 0)
        || !(p.lambda > 0 && p.lambda < 1) || !std::isfinite(p.c) || !std::isfinite(p.k1)
        || !std::isfinite(p.k3)) {
        throw contract_error("model parameters out of range");
    }
}

inline void validate(model_inputs const& in) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(finite(in.tf) && finite(in.qtf) && finite(in.doc_len) && finite(in.avg_doc_len)
          && finite(in.num_docs) && finite(in.total_tokens) && finite(in.df) && finite(in.cf))) {
        throw contract_error("non-finite model input");
    }
    if (!(in.tf >= 1) || !(in.qtf > 0) || !(in.doc_len >= in.tf) || !(in.avg_doc_len > 0)
        || !(in.num_docs >= 1) || !(in.df >= 1) || !(in.df <= in.num_docs) || !(in.cf >= in.tf)
        || !(in.cf >= in.df) || !(in.total_tokens >= in.cf)) {
        throw contract_error("model inputs violate tf>=1, tf<=l, 1<=df<=N, F>=max(tf,df), TC>=F");
    }
}

/// DFR normalization 2: tf scaled by log2(1 + c * avg_l / l).
inline double norm2(double tf, double doc_len, double avg_doc_len, double c) {
    return tf * std::log2(1.0 + c * avg_doc_len / doc_len);
}

namespace detail {

    inline constexpr double log2e = std::numbers::log2e;
    inline constexpr double two_pi = 2.0 * std::numbers::pi;
    inline constexpr double max_doc_ratio = 1.0 - 1e-9;

    inline double stirling_power(double n, double m) {
        m = std::max(m, 0.5);
        return (m + 0.5) * std::log2(n / m) + (n - m) * std::log2(n);
    }

    inline double bm25_tf_part(model_inputs const& in, model_params const& p) {
        double k = p.k1 * ((1.0 - p.b) + p.b * in.doc_len / in.avg_doc_len);
        return (p.k1 + 1.0) * in.tf / (k + in.tf);
    }

    inline double bm25_qtf_part(model_inputs const& in, model_params const& p) {
        return (p.k3 + 1.0) * in.qtf / (p.k3 + in.qtf);
    }

    // Shared core of the hypergeometric models (DLH13, DPH).
    inline double hypergeometric_gain(model_inputs const& in, double f) {
        return in.tf * std::log2((in.tf * in.avg_doc_len / in.doc_len) * (in.num_docs / in.cf))
            + 0.5 * std::log2(two_pi * in.tf * (1.0 - f));
    }

    inline double score_unchecked(model_id id, model_inputs const& in, model_params const& p) {
        double const N = in.num_docs;
        double const F = in.cf;
        switch (id) {
        case model_id::TF_IDF: {
            double k = p.k1 * ((1.0 - p.b) + p.b * in.doc_len / in.avg_doc_len);
            return in.qtf * (p.k1 * in.tf / (in.tf + k)) * std::log2(1.0 + N / in.df);
        }
        case model_id::BM25:
            return bm25_qtf_part(in, p) * bm25_tf_part(in, p)
                * std::log2((N - in.df + 0.5) / (in.df + 0.5));
        case model_id::DFR_BM25:
            return bm25_qtf_part(in, p) * bm25_tf_part(in, p) * std::log2((N + 1.0) / (in.df + 0.5));
        case model_id::InL2: {
            double tfn = norm2(in.tf, in.doc_len, in.avg_doc_len, p.c);
            return in.qtf * (tfn / (tfn + 1.0)) * std::log2((N + 1.0) / (in.df + 0.5));
        }
        case model_id::IFB2: {
            double tfn = norm2(in.tf, in.doc_len, in.avg_doc_len, p.c);
            return in.qtf * ((F + 1.0) / (in.df * (tfn + 1.0))) * tfn * std::log2((N + 1.0) / (F + 0.5));
        }
        case model_id::In_expC2: {
            double tfn = norm2(in.tf, in.doc_len, in.avg_doc_len, p.c);
            double n_exp = N * (1.0 - std::pow((N - 1.0) / N, F));
            return in.qtf * ((F + 1.0) / (in.df * (tfn + 1.0))) * tfn
                * std::log2((N + 1.0) / (n_exp + 0.5));
        }
        case model_id::BB2: {
            double tfn = norm2(in.tf, in.doc_len, in.avg_doc_len, p.c);
            // N = 1 would give -log2(0); the collection term is clamped to log2(1) = 0.
            double gain = -std::log2(std::max(N - 1.0, 1.0)) - log2e
                + stirling_power(N + F - 1.0, N + F - tfn - 2.0) - stirling_power(F, F - tfn);
            return in.qtf * ((F + 1.0) / (in.df * (tfn + 1.0))) * gain;
        }
        case model_id::PL2: {
            double tfn = norm2(in.tf, in.doc_len, in.avg_doc_len, p.c);
            double mean = F / N;
            return in.qtf / (tfn + 1.0)
                * (tfn * std::log2(tfn / mean) + (mean - tfn) * log2e
                   + 0.5 * std::log2(two_pi * tfn));
        }
        case model_id::DLH: {
            double f = std::min(in.tf / in.doc_len, max_doc_ratio);
            return in.qtf / (in.tf + 0.5)
                * (in.tf * std::log2((in.tf * in.avg_doc_len / in.doc_len) * (N / F))
                   + (in.doc_len - in.tf) * std::log2(1.0 - f)
                   + 0.5 * std::log2(two_pi * in.tf * (1.0 - f)));
        }
        case model_id::DLH13: {
            double f = std::min(in.tf / in.doc_len, max_doc_ratio);
            return in.qtf / (in.tf + 0.5) * hypergeometric_gain(in, f);
        }
        case model_id::DPH: {
            double f = std::min(in.tf / in.doc_len, max_doc_ratio);
            double norm = (1.0 - f) * (1.0 - f) / (in.tf + 1.0);
            return in.qtf * norm * hypergeometric_gain(in, f);
        }
        case model_id::DFRee: {
            double prior = in.tf / in.doc_len;
            double posterior = (in.tf + 1.0) / (in.doc_len + 1.0);
            double inv_pc = in.total_tokens / F;
            double norm = in.tf * std::log2(posterior / prior);
            return in.qtf * norm
                * (in.tf * -std::log2(prior * inv_pc) + (in.tf + 1.0) * std::log2(posterior * inv_pc)
                   + 0.5 * std::log2(posterior / prior));
        }
        case model_id::DFI0: {
            double expected = F * in.doc_len / in.total_tokens;
            if (in.tf <= expected) {
                return 0.0;
            }
            return in.qtf * std::log2(1.0 + (in.tf - expected) / std::sqrt(expected));
        }
        case model_id::Hiemstra_LM:
            return in.qtf
                * std::log2(1.0 + (p.lambda * in.tf * in.total_tokens) / ((1.0 - p.lambda) * F * in.doc_len));
        case model_id::LGD: {
            double tfn = norm2(in.tf, in.doc_len, in.avg_doc_len, p.c);
            double rate = in.df / N;
            return in.qtf * std::log2((rate + tfn) / rate);
        }
        case model_id::Js_KLs: {
            double pd = in.tf / in.doc_len;
            double pc = F / in.total_tokens;
            if (pd <= pc) {
                return 0.0;
            }
            double mid = 0.5 * (pd + pc);
            return in.qtf * in.tf * (pd * std::log2(pd / mid) + pc * std::log2(pc / mid));
        }
        case model_id::XSqrA_M: {
            double pd = in.tf / in.doc_len;
            double pc = F / in.total_tokens;
            if (pd <= pc) {
                return 0.0;
            }
            return in.qtf * in.doc_len * (pd - pc) * (pd - pc) / pc;
        }
        }
        return 0.0;
    }

}  // namespace detail

/// Contribution of one query term to a document's score. Inputs are validated;
/// callers never dispatch tf = 0 (absent terms contribute nothing).
inline double score_term(model_id id, model_inputs const& in, model_params const& p = {}) {
    validate(in);
    validate(p);
    double s = detail::score_unchecked(id, in, p);
    if (!std::isfinite(s)) {
        throw contract_error("non-finite score from " + std::string(to_string(id)));
    }
    return s;
}

}  // namespace gir
