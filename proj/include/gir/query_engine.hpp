#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gir/error.hpp"
#include "gir/index_core.hpp"
#include "gir/ranking_models.hpp"
#include "gir/text_analysis.hpp"
#include "gir/trec_io.hpp"

namespace gir {

inline constexpr std::size_t default_depth = 1000;

struct scored_doc {
    std::string docno;
    double score = 0.0;

    bool operator==(scored_doc const&) const = default;
};

/// Results for one topic in canonical order (score descending, docno descending).
struct ranked_list {
    std::string num;
    std::vector<scored_doc> items;

    bool operator==(ranked_list const&) const = default;
};

struct run_file {
    std::string tag;
    std::vector<ranked_list> lists;

    bool operator==(run_file const&) const = default;
};

inline bool canonical_before(scored_doc const& a, scored_doc const& b) {
    return canonical_before(a.score, a.docno, b.score, b.docno);
}

inline void sort_canonical(std::vector<scored_doc>& items) {
    std::sort(items.begin(), items.end(),
              [](scored_doc const& a, scored_doc const& b) { return canonical_before(a, b); });
}

/// Scores every document containing at least one query term (document-at-a-time)
/// and keeps the best `k` in a bounded heap. Query terms missing from the lexicon
/// are skipped.
inline ranked_list run_query(inverted_index const& index, model_id model, model_params const& params,
                             query_bag const& bag, std::size_t k = default_depth,
                             std::string num = {}) {
    if (bag.empty()) {
        throw empty_query(num);
    }
    if (k == 0) {
        throw contract_error("retrieval depth k must be >= 1");
    }
    validate(params);

    struct term_cursor {
        posting_cursor cursor;
        term_stats stats;
        double qtf;
    };
    std::vector<term_cursor> cursors;
    for (auto const& [term, qtf] : bag.terms) {
        if (auto id = index.find_term(term)) {
            cursors.push_back(term_cursor{index.cursor(*id), index.stats_of(*id), static_cast<double>(qtf)});
        }
    }

    auto const& stats = index.stats();
    model_inputs in;
    in.avg_doc_len = stats.avg_doc_len();
    in.num_docs = static_cast<double>(stats.num_docs);
    in.total_tokens = static_cast<double>(stats.total_tokens);

    struct candidate {
        std::uint32_t doc;
        double score;
    };
    auto better = [&](candidate const& a, candidate const& b) {
        return canonical_before(a.score, index.docno(a.doc), b.score, index.docno(b.doc));
    };
    std::vector<candidate> heap;
    heap.reserve(std::min<std::size_t>(k, index.num_docs()) + 1);

    while (true) {
        std::uint32_t doc = UINT32_MAX;
        bool any = false;
        for (auto const& c : cursors) {
            if (c.cursor.valid() && c.cursor->doc <= doc) {
                doc = c.cursor->doc;
                any = true;
            }
        }
        if (!any) {
            break;
        }
        in.doc_len = index.doc_length(doc);
        double score = 0.0;
        // Summation follows bag (lexicographic term) order so results are reproducible.
        for (auto& c : cursors) {
            if (c.cursor.valid() && c.cursor->doc == doc) {
                in.tf = c.cursor->tf;
                in.qtf = c.qtf;
                in.df = static_cast<double>(c.stats.df);
                in.cf = static_cast<double>(c.stats.cf);
                score += score_term(model, in, params);
                c.cursor.next();
            }
        }
        candidate cand{doc, score};
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), better);
        } else if (better(cand, heap.front())) {
            std::pop_heap(heap.begin(), heap.end(), better);
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), better);
        }
    }

    std::sort(heap.begin(), heap.end(), better);
    ranked_list out;
    out.num = std::move(num);
    out.items.reserve(heap.size());
    for (auto const& c : heap) {
        out.items.push_back(scored_doc{index.docno(c.doc), c.score});
    }
    return out;
}

/// Runs every topic under one model and field mode. Topics whose query bag is empty
/// yield an empty list. Topics may be scored in parallel; output keeps topic order.
inline run_file run_topics(inverted_index const& index, model_id model, model_params const& params,
                           std::span<topic const> topics, field_mode mode,
                           std::size_t k = default_depth, std::string tag = "gir",
                           std::size_t workers = 1) {
    validate(params);
    run_file run;
    run.tag = std::move(tag);
    run.lists.resize(topics.size());

    auto one = [&](std::size_t i) {
        auto const& t = topics[i];
        try {
            auto bag = build_query_bag(t, mode, index.analyzer());
            run.lists[i] = run_query(index, model, params, bag, k, t.num);
        } catch (empty_query const&) {
            run.lists[i] = ranked_list{t.num, {}};
        }
    };

    workers = std::max<std::size_t>(1, std::min(workers, topics.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < topics.size(); ++i) {
            one(i);
        }
        return run;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < topics.size(); i = next++) {
                try {
                    one(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return run;
}

inline std::vector<run_entry> to_run_entries(run_file const& run) {
    std::vector<run_entry> entries;
    for (auto const& list : run.lists) {
        std::size_t rank = 0;
        for (auto const& item : list.items) {
            entries.push_back(run_entry{list.num, item.docno, ++rank, item.score, run.tag});
        }
    }
    return entries;
}

inline std::string write_run(run_file const& run) { return write_run(to_run_entries(run)); }

}  // namespace gir
