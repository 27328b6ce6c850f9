#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "gir/error.hpp"
#include "gir/query_engine.hpp"
#include "gir/trec_io.hpp"

namespace gir {

inline constexpr std::size_t recall_levels = 11;
inline constexpr double gmap_floor = 1e-5;

using pr_curve = std::array<double, recall_levels>;

/// Relevance label of each retrieved document, in canonical rank order.
enum class judgment : std::int8_t { unjudged = -1, nonrelevant = 0, relevant = 1 };

struct judged_ranking {
    std::vector<judgment> labels;
    std::size_t relevant = 0;     ///< R: relevant documents in the qrels for the topic
    std::size_t nonrelevant = 0;  ///< NR: judged non-relevant documents for the topic
};

/// Re-sorts `list` canonically (stored order is ignored) and labels every item.
inline judged_ranking judge(ranked_list const& list, qrels const& q, std::string_view num) {
    std::vector<scored_doc const*> items;
    items.reserve(list.items.size());
    std::unordered_set<std::string_view> seen;
    for (auto const& item : list.items) {
        if (!seen.insert(item.docno).second) {
            throw evaluation_error("duplicate docno " + item.docno + " in ranking for topic "
                                   + std::string(num));
        }
        items.push_back(&item);
    }
    std::sort(items.begin(), items.end(),
              [](auto const* a, auto const* b) { return canonical_before(*a, *b); });

    judged_ranking out;
    out.relevant = q.relevant_count(num);
    out.nonrelevant = q.nonrelevant_count(num);
    out.labels.reserve(items.size());
    auto const* judgments = q.find(num);
    for (auto const* item : items) {
        judgment label = judgment::unjudged;
        if (judgments != nullptr) {
            if (auto it = judgments->find(item->docno); it != judgments->end()) {
                label = it->second > 0 ? judgment::relevant : judgment::nonrelevant;
            }
        }
        out.labels.push_back(label);
    }
    return out;
}

namespace metrics {

    /// Mean over relevant documents of precision at their ranks; unretrieved ones add 0.
    inline std::optional<double> average_precision(judged_ranking const& r) {
        if (r.relevant == 0) {
            return std::nullopt;
        }
        double sum = 0.0;
        std::size_t found = 0;
        for (std::size_t i = 0; i < r.labels.size(); ++i) {
            if (r.labels[i] == judgment::relevant) {
                ++found;
                sum += static_cast<double>(found) / static_cast<double>(i + 1);
            }
        }
        return sum / static_cast<double>(r.relevant);
    }

    /// Divisor is always k, even when fewer documents were retrieved.
    inline double precision_at(judged_ranking const& r, std::size_t k) {
        if (k == 0) {
            throw contract_error("precision cut-off must be >= 1");
        }
        std::size_t n = std::min(k, r.labels.size());
        std::size_t hits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            hits += r.labels[i] == judgment::relevant ? 1 : 0;
        }
        return static_cast<double>(hits) / static_cast<double>(k);
    }

    inline std::optional<double> r_precision(judged_ranking const& r) {
        if (r.relevant == 0) {
            return std::nullopt;
        }
        return precision_at(r, r.relevant);
    }

    /// Unjudged documents are skipped entirely. Each retrieved relevant document
    /// scores 1 - (judged non-relevant above it) / min(R, NR), clamped at 0.
    inline std::optional<double> bpref(judged_ranking const& r) {
        if (r.relevant == 0) {
            return std::nullopt;
        }
        double denom = static_cast<double>(std::min(r.relevant, r.nonrelevant));
        std::size_t nonrel_above = 0;
        double sum = 0.0;
        for (auto label : r.labels) {
            if (label == judgment::nonrelevant) {
                ++nonrel_above;
            } else if (label == judgment::relevant) {
                if (r.nonrelevant == 0) {
                    sum += 1.0;
                } else {
                    double penalty = std::min(static_cast<double>(nonrel_above), denom) / denom;
                    sum += 1.0 - penalty;
                }
            }
        }
        return sum / static_cast<double>(r.relevant);
    }

    inline double reciprocal_rank(judged_ranking const& r) {
        for (std::size_t i = 0; i < r.labels.size(); ++i) {
            if (r.labels[i] == judgment::relevant) {
                return 1.0 / static_cast<double>(i + 1);
            }
        }
        return 0.0;
    }

    /// Interpolated precision at recall 0.0, 0.1, ..., 1.0: the best precision at any
    /// cut-off whose recall reaches the level, 0 when the level is never reached.
    inline std::optional<pr_curve> interpolated_curve(judged_ranking const& r) {
        if (r.relevant == 0) {
            return std::nullopt;
        }
        pr_curve curve{};
        std::size_t found = 0;
        // Walk cut-offs; recall >= level/10 is tested in integers as found*10 >= level*R.
        for (std::size_t i = 0; i < r.labels.size(); ++i) {
            if (r.labels[i] != judgment::relevant) {
                continue;
            }
            ++found;
            double precision = static_cast<double>(found) / static_cast<double>(i + 1);
            for (std::size_t level = 0; level < recall_levels; ++level) {
                if (found * 10 >= level * r.relevant) {
                    curve[level] = std::max(curve[level], precision);
                }
            }
        }
        return curve;
    }

}  // namespace metrics

inline std::optional<double> average_precision(ranked_list const& list, qrels const& q,
                                               std::string_view num) {
    return metrics::average_precision(judge(list, q, num));
}

inline double precision_at_k(ranked_list const& list, qrels const& q, std::string_view num,
                             std::size_t k = 5) {
    return metrics::precision_at(judge(list, q, num), k);
}

inline std::optional<double> r_precision(ranked_list const& list, qrels const& q, std::string_view num) {
    return metrics::r_precision(judge(list, q, num));
}

inline std::optional<double> bpref(ranked_list const& list, qrels const& q, std::string_view num) {
    return metrics::bpref(judge(list, q, num));
}

inline double reciprocal_rank(ranked_list const& list, qrels const& q, std::string_view num) {
    return metrics::reciprocal_rank(judge(list, q, num));
}

inline std::optional<pr_curve> interpolated_pr_curve(ranked_list const& list, qrels const& q,
                                                     std::string_view num) {
    return metrics::interpolated_curve(judge(list, q, num));
}

/// Geometric mean of APs with zero (and near-zero) values floored at 1e-5.
inline double gmap(std::span<double const> aps) {
    if (aps.empty()) {
        throw contract_error("gmap needs at least one average precision value");
    }
    double log_sum = 0.0;
    for (double ap : aps) {
        log_sum += std::log(std::max(ap, gmap_floor));
    }
    return std::exp(log_sum / static_cast<double>(aps.size()));
}

/// Groups run lines by topic (first-appearance order). Stored ranks are not used.
inline run_file run_from_entries(std::span<run_entry const> entries) {
    run_file run;
    std::map<std::string, std::size_t, std::less<>> slot;
    for (auto const& e : entries) {
        if (run.tag.empty()) {
            run.tag = e.tag;
        }
        auto [it, inserted] = slot.emplace(e.num, run.lists.size());
        if (inserted) {
            run.lists.push_back(ranked_list{e.num, {}});
        }
        run.lists[it->second].items.push_back(scored_doc{e.docno, e.score});
    }
    return run;
}

struct topic_metrics {
    double ap = 0;
    double rprec = 0;
    double bpref = 0;
    double recip_rank = 0;
    double p5 = 0;
    double iprec0 = 0;
    pr_curve curve{};
};

struct aggregate_metrics {
    std::size_t num_topics = 0;
    double map = 0;
    double gmap = 0;
    double rprec = 0;
    double bpref = 0;
    double recip_rank = 0;
    double p5 = 0;
    double iprec0 = 0;
};

struct metric_report {
    std::map<std::string, topic_metrics> per_topic;
    aggregate_metrics aggregate;
    pr_curve curve{};  ///< per-level mean over evaluated topics
};

inline topic_metrics evaluate_topic(judged_ranking const& r) {
    topic_metrics m;
    m.ap = *metrics::average_precision(r);
    m.rprec = *metrics::r_precision(r);
    m.bpref = *metrics::bpref(r);
    m.recip_rank = metrics::reciprocal_rank(r);
    m.p5 = metrics::precision_at(r, 5);
    m.curve = *metrics::interpolated_curve(r);
    m.iprec0 = m.curve[0];
    return m;
}

/// Evaluates every run topic that has at least one relevant judgment. Topics absent
/// from the qrels or without relevant documents are excluded from all means.
inline metric_report evaluate_run(run_file const& run, qrels const& q) {
    std::set<std::string> run_topics;
    for (auto const& list : run.lists) {
        if (!run_topics.insert(list.num).second) {
            throw evaluation_error("topic " + list.num + " appears twice in the run");
        }
    }
    bool shared = false;
    for (auto const& num : run_topics) {
        shared = shared || q.has_topic(num);
    }
    if (!shared) {
        auto join = [](auto const& xs) {
            std::string out;
            for (auto const& x : xs) {
                out += out.empty() ? "" : ",";
                out += x;
            }
            return out.empty() ? std::string("(none)") : out;
        };
        throw evaluation_error("run and qrels share no topics; run: " + join(run_topics)
                               + "; qrels: " + join(q.topics()));
    }

    metric_report report;
    for (auto const& list : run.lists) {
        if (q.relevant_count(list.num) == 0) {
            continue;
        }
        report.per_topic.emplace(list.num, evaluate_topic(judge(list, q, list.num)));
    }
    if (report.per_topic.empty()) {
        throw evaluation_error("no run topic has relevant judgments");
    }

    auto& agg = report.aggregate;
    agg.num_topics = report.per_topic.size();
    std::vector<double> aps;
    for (auto const& [_, m] : report.per_topic) {
        aps.push_back(m.ap);
        agg.map += m.ap;
        agg.rprec += m.rprec;
        agg.bpref += m.bpref;
        agg.recip_rank += m.recip_rank;
        agg.p5 += m.p5;
        agg.iprec0 += m.iprec0;
        for (std::size_t i = 0; i < recall_levels; ++i) {
            report.curve[i] += m.curve[i];
        }
    }
    double n = static_cast<double>(agg.num_topics);
    agg.map /= n;
    agg.rprec /= n;
    agg.bpref /= n;
    agg.recip_rank /= n;
    agg.p5 /= n;
    agg.iprec0 /= n;
    for (auto& v : report.curve) {
        v /= n;
    }
    agg.gmap = gmap(aps);
    return report;
}

inline double mean_average_precision(run_file const& run, qrels const& q) {
    return evaluate_run(run, q).aggregate.map;
}

// Report rendering ---------------------------------------------------------------

namespace detail {

    inline std::string fixed4(double v) {
        char buf[64];
        int n = std::snprintf(buf, sizeof(buf), "%.4f", v);
        return std::string(buf, static_cast<std::size_t>(n));
    }

    inline std::string recall_label(std::size_t level) {
        char buf[32];
        int n = std::snprintf(buf, sizeof(buf), "%.2f", static_cast<double>(level) / 10.0);
        return std::string(buf, static_cast<std::size_t>(n));
    }

}  // namespace detail

/// Measure names accepted by render functions, in output order.
inline std::vector<std::string> const& measure_names() {
    static std::vector<std::string> const names{"num_q", "map",        "gm_map", "Rprec",
                                                "bpref", "recip_rank", "P_5",    "iprec_at_recall"};
    return names;
}

inline bool is_measure(std::string_view name) {
    auto const& names = measure_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

struct report_row {
    std::string measure;
    std::string topic;
    std::string value;
};

/// Flattens a report into (measure, topic, value) rows: per-topic rows in topic order
/// when requested, then the aggregate rows keyed "all".
inline std::vector<report_row> report_rows(metric_report const& report,
                                           std::span<std::string const> measures, bool per_topic) {
    auto wants = [&](std::string_view m) {
        return measures.empty() || std::find(measures.begin(), measures.end(), m) != measures.end();
    };
    std::vector<report_row> rows;
    auto emit = [&](std::string const& topic, topic_metrics const& m) {
        if (wants("map")) rows.push_back({"map", topic, detail::fixed4(m.ap)});
        if (wants("Rprec")) rows.push_back({"Rprec", topic, detail::fixed4(m.rprec)});
        if (wants("bpref")) rows.push_back({"bpref", topic, detail::fixed4(m.bpref)});
        if (wants("recip_rank")) rows.push_back({"recip_rank", topic, detail::fixed4(m.recip_rank)});
        if (wants("P_5")) rows.push_back({"P_5", topic, detail::fixed4(m.p5)});
        if (wants("iprec_at_recall")) {
            for (std::size_t i = 0; i < recall_levels; ++i) {
                rows.push_back({"iprec_at_recall_" + detail::recall_label(i), topic,
                                detail::fixed4(m.curve[i])});
            }
        }
    };
    if (per_topic) {
        for (auto const& [num, m] : report.per_topic) {
            emit(num, m);
        }
    }
    auto const& a = report.aggregate;
    if (wants("num_q")) rows.push_back({"num_q", "all", std::to_string(a.num_topics)});
    if (wants("map")) rows.push_back({"map", "all", detail::fixed4(a.map)});
    if (wants("gm_map")) rows.push_back({"gm_map", "all", detail::fixed4(a.gmap)});
    if (wants("Rprec")) rows.push_back({"Rprec", "all", detail::fixed4(a.rprec)});
    if (wants("bpref")) rows.push_back({"bpref", "all", detail::fixed4(a.bpref)});
    if (wants("recip_rank")) rows.push_back({"recip_rank", "all", detail::fixed4(a.recip_rank)});
    if (wants("P_5")) rows.push_back({"P_5", "all", detail::fixed4(a.p5)});
    if (wants("iprec_at_recall")) {
        for (std::size_t i = 0; i < recall_levels; ++i) {
            rows.push_back({"iprec_at_recall_" + detail::recall_label(i), "all",
                            detail::fixed4(report.curve[i])});
        }
    }
    return rows;
}

inline std::string render_report_text(metric_report const& report,
                                       std::span<std::string const> measures = {},
                                       bool per_topic = false) {
    auto rows = report_rows(report, measures, per_topic);
    std::size_t w_measure = 0;
    std::size_t w_topic = 0;
    for (auto const& r : rows) {
        w_measure = std::max(w_measure, r.measure.size());
        w_topic = std::max(w_topic, r.topic.size());
    }
    std::string out;
    for (auto const& r : rows) {
        out += r.measure + std::string(w_measure - r.measure.size() + 2, ' ');
        out += r.topic + std::string(w_topic - r.topic.size() + 2, ' ');
        out += r.value + "\n";
    }
    return out;
}

inline std::string render_report_tsv(metric_report const& report,
                                      std::span<std::string const> measures = {},
                                      bool per_topic = true) {
    std::string out;
    for (auto const& r : report_rows(report, measures, per_topic)) {
        out += r.measure + "\t" + r.topic + "\t" + r.value + "\n";
    }
    return out;
}

/// Two-column TSV (recall, interpolated precision), one row per recall level.
inline std::string render_curve_tsv(pr_curve const& curve) {
    std::string out;
    for (std::size_t i = 0; i < recall_levels; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f", static_cast<double>(i) / 10.0);
        out += std::string(buf) + "\t" + detail::fixed4(curve[i]) + "\n";
    }
    return out;
}

// Model x field-mode comparison --------------------------------------------------

struct matrix_cell_run {
    std::string model;
    field_mode mode = field_mode::T;
    std::optional<run_file> run;  ///< absent when the run could not be produced
};

/// MAP per (model, field mode). Cells without an evaluable run stay empty.
struct comparison_matrix {
    std::vector<std::string> models;
    std::vector<field_mode> modes;
    std::vector<std::vector<std::optional<double>>> cells;  ///< [model][mode]

    [[nodiscard]] std::optional<double> at(std::string_view model, field_mode mode) const {
        auto r = std::find(models.begin(), models.end(), model);
        auto c = std::find(modes.begin(), modes.end(), mode);
        if (r == models.end() || c == modes.end()) {
            return std::nullopt;
        }
        return cells[static_cast<std::size_t>(r - models.begin())][static_cast<std::size_t>(c - modes.begin())];
    }

    [[nodiscard]] std::string to_text() const {
        std::string const head = "Model";
        std::size_t w0 = head.size();
        for (auto const& m : models) {
            w0 = std::max(w0, m.size());
        }
        std::size_t const w = 8;
        auto pad_left = [](std::string s, std::size_t width) {
            return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
        };
        std::string out = head + std::string(w0 - head.size(), ' ');
        for (auto mode : modes) {
            out += "  " + pad_left(std::string(to_string(mode)), w);
        }
        out += "\n";
        for (std::size_t r = 0; r < models.size(); ++r) {
            out += models[r] + std::string(w0 - models[r].size(), ' ');
            for (std::size_t c = 0; c < modes.size(); ++c) {
                auto const& cell = cells[r][c];
                out += "  " + pad_left(cell ? detail::fixed4(*cell) : std::string("-"), w);
            }
            out += "\n";
        }
        return out;
    }

    [[nodiscard]] std::string to_tsv() const {
        std::string out = "model";
        for (auto mode : modes) {
            out += "\t" + std::string(to_string(mode));
        }
        out += "\n";
        for (std::size_t r = 0; r < models.size(); ++r) {
            out += models[r];
            for (std::size_t c = 0; c < modes.size(); ++c) {
                auto const& cell = cells[r][c];
                out += "\t" + (cell ? detail::fixed4(*cell) : std::string("NA"));
            }
            out += "\n";
        }
        return out;
    }
};

/// Rows follow first appearance of each model, columns are ordered T, TD, TDN.
inline comparison_matrix build_comparison_matrix(std::span<matrix_cell_run const> runs, qrels const& q) {
    comparison_matrix m;
    for (auto const& cell : runs) {
        if (std::find(m.models.begin(), m.models.end(), cell.model) == m.models.end()) {
            m.models.push_back(cell.model);
        }
        if (std::find(m.modes.begin(), m.modes.end(), cell.mode) == m.modes.end()) {
            m.modes.push_back(cell.mode);
        }
    }
    std::sort(m.modes.begin(), m.modes.end());
    m.cells.assign(m.models.size(), std::vector<std::optional<double>>(m.modes.size()));
    for (auto const& cell : runs) {
        if (!cell.run) {
            continue;
        }
        auto r = static_cast<std::size_t>(std::find(m.models.begin(), m.models.end(), cell.model) - m.models.begin());
        auto c = static_cast<std::size_t>(std::find(m.modes.begin(), m.modes.end(), cell.mode) - m.modes.begin());
        try {
            m.cells[r][c] = mean_average_precision(*cell.run, q);
        } catch (evaluation_error const&) {
            m.cells[r][c] = std::nullopt;
        }
    }
    return m;
}

}  // namespace gir
