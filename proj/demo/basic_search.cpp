// Indexes the bundled four-document collection, runs topic 150 under a few models
// and prints the ranked lists together with their average precision.

#include <fstream>
#include <iostream>

#include "gir/gir.hpp"

int main(int argc, char** argv) {
    std::string dir = argc > 1 ? argv[1] : GIR_DEMO_DIR;
    std::ifstream docs_in(dir + "/collection.trec");
    std::ifstream topics_in(dir + "/topics.txt");
    std::ifstream qrels_in(dir + "/qrels.txt");

    auto index = gir::build_index(gir::parse_documents(docs_in));
    auto topics = gir::parse_topics(topics_in);
    auto judgments = gir::parse_qrels(qrels_in);

    auto const& s = index.stats();
    std::cout << "N=" << s.num_docs << " TC=" << s.total_tokens << " avg_l=" << s.avg_doc_len()
              << " vocab=" << s.vocab_size << "\n";

    for (auto model : {gir::model_id::TF_IDF, gir::model_id::InL2, gir::model_id::In_expC2}) {
        for (auto mode : {gir::field_mode::T, gir::field_mode::TD}) {
            auto run = gir::run_topics(index, model, {}, topics, mode, 10, std::string(gir::to_string(model)));
            auto report = gir::evaluate_run(run, judgments);
            std::cout << "\n" << gir::to_string(model) << " / " << gir::to_string(mode)
                      << "  map=" << report.aggregate.map << "\n"
                      << gir::write_run(run);
        }
    }
}
