#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "gir/synthetic.hpp"
#include "oracles.hpp"

using namespace gir;

namespace {

std::vector<raw_document> toy() { return {{"d1", "a b a"}, {"d2", "b c"}}; }

query_bag bag_of(std::initializer_list<std::pair<char const*, std::uint32_t>> terms) {
    query_bag bag;
    for (auto const& [t, n] : terms) {
        bag.terms.emplace(t, n);
    }
    return bag;
}

std::vector<std::string> docnos(ranked_list const& l) {
    std::vector<std::string> out;
    for (auto const& i : l.items) {
        out.push_back(i.docno);
    }
    return out;
}

/// Small random corpus over a tiny vocabulary so queries match many documents and ties occur.
std::vector<raw_document> random_corpus(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
    std::vector<raw_document> docs;
    for (std::size_t d = 0; d < n; ++d) {
        std::string text;
        auto len = std::uniform_int_distribution<std::size_t>(0, 12)(rng);
        for (std::size_t i = 0; i < len; ++i) {
            text += synthetic::gujarati_word(std::uniform_int_distribution<std::size_t>(0, vocab - 1)(rng)) + " ";
        }
        docs.push_back({"doc" + std::to_string(d), text});
    }
    if (docs[0].text.empty()) {
        docs[0].text = synthetic::gujarati_word(0);
    }
    return docs;
}

query_bag random_bag(std::mt19937_64& rng, std::size_t vocab) {
    query_bag bag;
    auto n = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    for (std::size_t i = 0; i < n; ++i) {
        // Occasionally draw a word that no document contains.
        auto w = std::uniform_int_distribution<std::size_t>(0, vocab + 2)(rng);
        ++bag.terms[synthetic::gujarati_word(w)];
    }
    return bag;
}

}  // namespace

TEST(RunQuery, ContainmentOnToyCorpus) {
    auto index = build_index(toy());
    for (auto id : list_models()) {
        auto list = run_query(index, id, {}, bag_of({{"c", 1}}), 10);
        EXPECT_EQ(docnos(list), (std::vector<std::string>{"d2"})) << to_string(id);
    }
}

TEST(RunQuery, SingleTermReducesToScoreTerm) {
    auto index = build_index(toy());
    for (auto id : list_models()) {
        auto list = run_query(index, id, {}, bag_of({{"a", 1}}), 10);
        ASSERT_EQ(docnos(list), (std::vector<std::string>{"d1"}));
        model_inputs in{2, 1, 3, 2.5, 2, 5, 1, 2};
        EXPECT_EQ(list.items[0].score, score_term(id, in)) << to_string(id);
    }
}

TEST(RunQuery, TiesBreakByDocnoDescending) {
    std::vector<raw_document> docs{{"gs1", "x y"}, {"gs2", "x y"}, {"gs10", "z"}};
    auto index = build_index(docs);
    for (auto id : list_models()) {
        auto list = run_query(index, id, {}, bag_of({{"x", 1}}), 10);
        EXPECT_EQ(docnos(list), (std::vector<std::string>{"gs2", "gs1"})) << to_string(id);
    }
}

TEST(RunQuery, UnknownTermsAreSkipped) {
    auto index = build_index(toy());
    auto with = run_query(index, model_id::InL2, {}, bag_of({{"b", 1}, {"nowhere", 3}}), 10);
    auto without = run_query(index, model_id::InL2, {}, bag_of({{"b", 1}}), 10);
    EXPECT_EQ(with, without);
    EXPECT_TRUE(run_query(index, model_id::InL2, {}, bag_of({{"nowhere", 1}}), 10).items.empty());
}

TEST(RunQuery, Errors) {
    auto index = build_index(toy());
    EXPECT_THROW(run_query(index, model_id::BM25, {}, query_bag{}, 10, "9"), empty_query);
    EXPECT_THROW(run_query(index, model_id::BM25, {}, bag_of({{"a", 1}}), 0), contract_error);
    EXPECT_THROW(run_query(index, model_id::BM25, model_params{.k1 = -1}, bag_of({{"a", 1}}), 5), contract_error);
}

TEST(RunQuery, EqualsFullScanForAllModels) {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 6; ++round) {
        auto docs = random_corpus(rng, 40, 15);
        auto index = build_index(docs);
        for (int q = 0; q < 10; ++q) {
            auto bag = random_bag(rng, 15);
            std::size_t k = q % 3 == 0 ? 5 : 1000;
            for (auto id : list_models()) {
                auto got = run_query(index, id, {}, bag, k);
                auto want = oracle::full_scan(docs, id, {}, bag, k);
                ASSERT_EQ(docnos(got), docnos(want)) << to_string(id);
                for (std::size_t i = 0; i < got.items.size(); ++i) {
                    ASSERT_TRUE(oracle::close_rel(got.items[i].score, want.items[i].score, 1e-9)) << to_string(id);
                }
            }
        }
    }
}

TEST(RunQuery, PrefixOfDeeperRetrieval) {
    std::mt19937_64 rng(3);
    auto docs = random_corpus(rng, 50, 10);
    auto index = build_index(docs);
    for (int q = 0; q < 10; ++q) {
        auto bag = random_bag(rng, 10);
        for (auto id : {model_id::BM25, model_id::DPH, model_id::XSqrA_M}) {
            auto deep = run_query(index, id, {}, bag, 50);
            for (std::size_t j = 1; j <= 50; j += 7) {
                auto shallow = run_query(index, id, {}, bag, j);
                auto prefix = deep.items;
                prefix.resize(std::min(j, prefix.size()));
                EXPECT_EQ(shallow.items, prefix);
            }
        }
    }
}

TEST(RunQuery, IngestOrderDoesNotMatter) {
    std::mt19937_64 rng(21);
    auto docs = random_corpus(rng, 45, 12);
    auto shuffled = docs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto a = build_index(docs);
    auto b = build_index(shuffled);
    for (int q = 0; q < 10; ++q) {
        auto bag = random_bag(rng, 12);
        for (auto id : list_models()) {
            EXPECT_EQ(run_query(a, id, {}, bag, 20), run_query(b, id, {}, bag, 20)) << to_string(id);
        }
    }
}

TEST(RunQuery, NonMatchingDocumentKeepsRetrievedSet) {
    // Collection statistics shift, so scores may move; the retrieved set must not.
    std::mt19937_64 rng(8);
    auto docs = random_corpus(rng, 30, 10);
    auto base = build_index(docs);
    auto extended_docs = docs;
    extended_docs.push_back({"zz-extra", "ઞઞઞ ઞઞઞ"});
    auto extended = build_index(extended_docs);
    for (int q = 0; q < 10; ++q) {
        auto bag = random_bag(rng, 10);
        for (auto id : list_models()) {
            auto before = docnos(run_query(base, id, {}, bag, 1000));
            auto after = docnos(run_query(extended, id, {}, bag, 1000));
            EXPECT_EQ(std::set(before.begin(), before.end()), std::set(after.begin(), after.end()));
            EXPECT_EQ(std::count(after.begin(), after.end(), "zz-extra"), 0);
        }
    }
}

TEST(RunTopics, ShapeAndDeterminism) {
    auto corpus = synthetic::generate({.num_docs = 300, .vocab_size = 800, .num_topics = 2,
                                       .relevant_per_topic = 5, .nonrelevant_per_topic = 5});
    auto index = build_index(corpus.docs);
    auto run = run_topics(index, model_id::InL2, {}, corpus.topics, field_mode::T, 10, "r1");
    ASSERT_EQ(run.lists.size(), 2U);
    for (auto const& l : run.lists) {
        EXPECT_LE(l.items.size(), 10U);
        EXPECT_FALSE(l.items.empty());
    }
    EXPECT_EQ(write_run(run), write_run(run_topics(index, model_id::InL2, {}, corpus.topics, field_mode::T, 10, "r1")));
    EXPECT_EQ(write_run(run), write_run(run_topics(index, model_id::InL2, {}, corpus.topics, field_mode::T, 10, "r1", 4)));
}

TEST(RunTopics, EmptyTopicYieldsEmptyList) {
    auto index = build_index(toy());
    std::vector<topic> topics{{"1", "a", "", ""}, {"2", "?!", "", ""}, {"3", "c", "", ""}};
    auto run = run_topics(index, model_id::BM25, {}, topics, field_mode::T, 10);
    ASSERT_EQ(run.lists.size(), 3U);
    EXPECT_TRUE(run.lists[1].items.empty());
    EXPECT_EQ(run.lists[1].num, "2");
    EXPECT_EQ(write_run(run), "1 Q0 d1 1 " + detail::format_score(run.lists[0].items[0].score) + " gir\n"
                                  + "3 Q0 d2 1 " + detail::format_score(run.lists[2].items[0].score) + " gir\n");
}

TEST(RunTopics, DescriptionWidensRetrievedSet) {
    std::vector<raw_document> docs{{"d1", "alpha beta"}, {"d2", "gamma"}, {"d3", "delta alpha"}, {"d4", "epsilon"}};
    auto index = build_index(docs);
    std::vector<topic> topics{{"1", "alpha", "gamma", "epsilon"}};
    for (auto id : list_models()) {
        auto t = run_topics(index, id, {}, topics, field_mode::T);
        auto td = run_topics(index, id, {}, topics, field_mode::TD);
        auto tdn = run_topics(index, id, {}, topics, field_mode::TDN);
        EXPECT_EQ(t.lists[0].items.size(), 2U);
        EXPECT_EQ(td.lists[0].items.size(), 3U);
        EXPECT_EQ(tdn.lists[0].items.size(), 4U);
    }
}
