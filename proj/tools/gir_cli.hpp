#pragma once

// Command-line front end: index, search, evaluate, sweep (plus synth for desk
// corpora). Exit status: 0 success, 1 runtime error, 2 usage error.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gir/gir.hpp"
#include "gir/synthetic.hpp"

namespace gir::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_usage = 2;

struct usage_error : error {
    using error::error;
};

/// key=value settings from gir.conf; `#` starts a comment.
using config_map = std::map<std::string, std::string, std::less<>>;

inline config_map parse_config(std::string_view text) {
    config_map out;
    detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            return;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw usage_error("config line " + std::to_string(line_no) + ": expected key=value");
        }
        out[std::string(detail::trim(line.substr(0, eq)))] = std::string(detail::trim(line.substr(eq + 1)));
    });
    return out;
}

inline std::string read_file(std::filesystem::path const& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw error("cannot open " + path.string());
    }
    return read_all(in);
}

inline void write_text(std::filesystem::path const& path, std::string const& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw error("cannot write " + path.string());
    }
}

inline std::string format_avg(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    std::string s(buf);
    while (!s.empty() && s.back() == '0') {
        s.pop_back();
    }
    if (!s.empty() && s.back() == '.') {
        s.pop_back();
    }
    return s;
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        auto item = detail::trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
        if (!item.empty()) {
            out.emplace_back(item);
        }
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

inline model_params parse_params(config_map const& config, std::vector<std::string> const& overrides) {
    model_params params;
    auto apply = [&](std::string_view key, std::string_view value) {
        auto v = detail::parse_double(value);
        if (!v || !params.set(key, *v)) {
            throw usage_error("invalid parameter " + std::string(key) + "=" + std::string(value)
                              + " (keys: c, k1, b, k3, lambda)");
        }
    };
    for (auto const& key : {"c", "k1", "b", "k3", "lambda"}) {
        if (auto it = config.find(key); it != config.end()) {
            apply(key, it->second);
        }
    }
    for (auto const& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw usage_error("--param expects key=value, got " + kv);
        }
        apply(kv.substr(0, eq), kv.substr(eq + 1));
    }
    try {
        validate(params);
    } catch (contract_error const& e) {
        throw usage_error(e.what());
    }
    return params;
}

inline model_id require_model(std::string const& name) {
    auto id = parse_model_id(name);
    if (!id) {
        throw error("unknown model '" + name + "'; valid models: " + model_list_string());
    }
    return *id;
}

/// Regular files under `path` in sorted order, or `path` itself if it is a file.
inline std::vector<std::filesystem::path> collection_files(std::filesystem::path const& path) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(path)) {
        for (auto const& entry : std::filesystem::recursive_directory_iterator(path)) {
            if (entry.is_regular_file()) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    return files;
}

class application {
  public:
    application(std::ostream& out, std::ostream& err) : m_out(out), m_err(err) {}

    int run(std::vector<std::string> const& args) {
        CLI::App app{"Ad hoc retrieval engine and TREC-style evaluation harness", "gir"};
        app.require_subcommand(1);
        app.add_option("--config", m_config_path, "Configuration file (key=value)");

        auto* index = app.add_subcommand("index", "Build an index from a TREC document collection");
        index->add_option("--collection", m_collection, "Document file or directory")->required();
        index->add_option("--output", m_index_dir, "Index directory to create")->required();
        index->add_option("--stoplist", m_stoplist, "Stoplist file (one term per line)");
        index->add_option("--workers", m_workers, "Tokenization threads");
        index->add_option("--segment-docs", m_segment_docs, "Documents per in-memory segment");
        index->add_flag("--force", m_force, "Overwrite an existing index directory");

        auto* search = app.add_subcommand("search", "Rank documents for a topic file");
        search->add_option("--index", m_index_dir, "Index directory")->required();
        search->add_option("--topics", m_topics, "Topic file")->required();
        search->add_option("--model", m_model, "Weighting model id")->required();
        search->add_option("--fields", m_fields, "Topic fields: T, TD or TDN")->required();
        search->add_option("--k", m_k, "Retrieval depth");
        search->add_option("--tag", m_tag, "Run tag (defaults to the model id)");
        search->add_option("--param", m_params, "Model parameter override key=value");
        search->add_option("--output", m_output, "Run file (default: standard output)");
        search->add_option("--workers", m_workers, "Topic-level threads");

        auto* evaluate = app.add_subcommand("evaluate", "Score a run against relevance judgments");
        evaluate->add_option("--qrels", m_qrels, "Qrels file")->required();
        evaluate->add_option("--run", m_run, "Run file")->required();
        evaluate->add_option("--measures", m_measures, "all, or a comma list of measures");
        evaluate->add_option("--curve", m_curve, "Write the 11-point curve as TSV");
        evaluate->add_option("--format", m_format, "text or tsv")->check(CLI::IsMember({"text", "tsv"}));
        evaluate->add_flag("-q,--per-topic", m_per_topic, "Include per-topic rows");

        auto* sweep = app.add_subcommand("sweep", "Run and evaluate a model x field-mode matrix");
        sweep->add_option("--index", m_index_dir, "Index directory")->required();
        sweep->add_option("--topics", m_topics, "Topic file")->required();
        sweep->add_option("--qrels", m_qrels, "Qrels file")->required();
        sweep->add_option("--models", m_models, "all, or a comma list of model ids");
        sweep->add_option("--fields", m_fields, "Comma list of field modes");
        sweep->add_option("--out", m_output, "Output directory");
        sweep->add_option("--k", m_k, "Retrieval depth");
        sweep->add_option("--param", m_params, "Model parameter override key=value");
        sweep->add_option("--workers", m_workers, "Cells evaluated in parallel");

        auto* synth = app.add_subcommand("synth", "Generate a synthetic test collection");
        synth->add_option("--out", m_output, "Output directory")->required();
        synth->add_option("--docs", m_synth.num_docs, "Number of documents");
        synth->add_option("--topics", m_synth.num_topics, "Number of topics");
        synth->add_option("--vocab", m_synth.vocab_size, "Vocabulary size");
        synth->add_option("--seed", m_synth.seed, "Random seed");

        std::vector<char const*> argv;
        argv.push_back("gir");
        for (auto const& a : args) {
            argv.push_back(a.c_str());
        }
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (CLI::CallForHelp const& e) {
            return app.exit(e, m_out, m_err);
        } catch (CLI::CallForAllHelp const& e) {
            return app.exit(e, m_out, m_err);
        } catch (CLI::ParseError const& e) {
            app.exit(e, m_err, m_err);
            return exit_usage;
        }

        try {
            load_config();
            if (index->parsed()) {
                return cmd_index(*index);
            }
            if (search->parsed()) {
                return cmd_search(*search);
            }
            if (evaluate->parsed()) {
                return cmd_evaluate();
            }
            if (sweep->parsed()) {
                return cmd_sweep(*sweep);
            }
            if (synth->parsed()) {
                return cmd_synth();
            }
        } catch (usage_error const& e) {
            m_err << "gir: " << e.what() << "\n";
            m_err << app.help() << "\n";
            return exit_usage;
        } catch (std::exception const& e) {
            m_err << "gir: " << e.what() << "\n";
            return exit_runtime;
        }
        return exit_usage;
    }

  private:
    void load_config() {
        std::filesystem::path path = m_config_path.empty() ? "gir.conf" : m_config_path;
        std::error_code ec;
        if (std::filesystem::is_regular_file(path, ec)) {
            m_config = parse_config(read_file(path));
        } else if (!m_config_path.empty()) {
            throw usage_error("config file not found: " + m_config_path);
        }
    }

    /// Flag value if given, else the config entry, else the current default.
    template <typename T>
    void from_config(CLI::App const& cmd, std::string const& flag, std::string const& key, T& value) {
        if (cmd.count(flag) > 0) {
            return;
        }
        auto it = m_config.find(key);
        if (it == m_config.end()) {
            return;
        }
        if constexpr (std::is_same_v<T, std::string>) {
            value = it->second;
        } else {
            auto v = detail::parse_int<T>(it->second);
            if (!v) {
                throw usage_error("invalid config value " + key + "=" + it->second);
            }
            value = *v;
        }
    }

    void resolve_workers(CLI::App const& cmd) {
        if (cmd.count("--workers") > 0) {
            return;
        }
        if (m_config.contains("workers")) {
            from_config(cmd, "--workers", "workers", m_workers);
            return;
        }
        if (char const* env = std::getenv("GIR_WORKERS"); env != nullptr && *env != '\0') {
            auto v = detail::parse_int<std::size_t>(env);
            if (!v) {
                throw usage_error(std::string("invalid GIR_WORKERS value ") + env);
            }
            m_workers = *v;
        }
    }

    static void require_exists(std::string const& path, char const* what) {
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) {
            throw usage_error(std::string(what) + " not found: " + path);
        }
    }

    int cmd_index(CLI::App const& cmd) {
        resolve_workers(cmd);
        from_config(cmd, "--segment-docs", "segment_docs", m_segment_docs);
        from_config(cmd, "--stoplist", "stoplist", m_stoplist);
        require_exists(m_collection, "collection");
        if (!m_stoplist.empty()) {
            require_exists(m_stoplist, "stoplist");
        }
        if (m_workers == 0 || m_segment_docs == 0) {
            throw usage_error("--workers and --segment-docs must be >= 1");
        }

        std::error_code ec;
        std::filesystem::path out_dir = m_index_dir;
        if (std::filesystem::exists(out_dir, ec)) {
            bool empty_dir = std::filesystem::is_directory(out_dir, ec) && std::filesystem::is_empty(out_dir, ec);
            if (!empty_dir && !m_force) {
                throw error(m_index_dir + " already exists; pass --force to overwrite");
            }
            if (!empty_dir) {
                std::filesystem::remove_all(out_dir);
            }
        }

        analyzer an;
        if (!m_stoplist.empty()) {
            an = analyzer(parse_stoplist(read_file(m_stoplist)));
        }
        build_options opts;
        opts.workers = m_workers;
        opts.segment_docs = m_segment_docs;
        index_builder builder(std::move(an), opts);
        for (auto const& file : collection_files(m_collection)) {
            std::vector<raw_document> docs;
            try {
                docs = parse_documents(read_file(file));
            } catch (parse_error const& e) {
                throw error(file.string() + ": " + e.what());
            }
            builder.add_batch(docs);
        }
        auto idx = builder.finish();
        save_index(idx, out_dir);
        auto const& s = idx.stats();
        m_out << "N=" << s.num_docs << " TC=" << s.total_tokens << " avg_l=" << format_avg(s.avg_doc_len())
              << " vocab=" << s.vocab_size << "\n";
        return exit_ok;
    }

    int cmd_search(CLI::App const& cmd) {
        resolve_workers(cmd);
        from_config(cmd, "--k", "k", m_k);
        from_config(cmd, "--tag", "tag", m_tag);
        auto mode = parse_field_mode(m_fields);
        if (!mode) {
            throw usage_error("--fields must be T, TD or TDN");
        }
        if (m_k == 0 || m_workers == 0) {
            throw usage_error("--k and --workers must be >= 1");
        }
        auto model = require_model(m_model);
        require_exists(m_index_dir, "index");
        require_exists(m_topics, "topics");
        auto params = parse_params(m_config, m_params);
        auto idx = load_index(m_index_dir);
        auto topics = parse_topics(read_file(m_topics));
        auto tag = m_tag.empty() ? std::string(to_string(model)) : m_tag;
        auto run = run_topics(idx, model, params, topics, *mode, m_k, tag, m_workers);
        auto text = write_run(run);
        if (m_output.empty()) {
            m_out << text;
        } else {
            write_text(m_output, text);
        }
        return exit_ok;
    }

    int cmd_evaluate() {
        require_exists(m_qrels, "qrels");
        require_exists(m_run, "run");
        std::vector<std::string> measures;
        if (m_measures != "all") {
            measures = split_list(m_measures);
            for (auto const& m : measures) {
                if (!is_measure(m)) {
                    std::string known;
                    for (auto const& n : measure_names()) {
                        known += (known.empty() ? "" : ", ") + n;
                    }
                    throw usage_error("unknown measure '" + m + "'; known: " + known);
                }
            }
        }
        auto q = parse_qrels(read_file(m_qrels));
        auto entries = parse_run(read_file(m_run));
        auto report = evaluate_run(run_from_entries(entries), q);
        if (m_format == "tsv") {
            m_out << render_report_tsv(report, measures, m_per_topic);
        } else {
            m_out << render_report_text(report, measures, m_per_topic);
        }
        if (!m_curve.empty()) {
            write_text(m_curve, render_curve_tsv(report.curve));
        }
        return exit_ok;
    }

    int cmd_sweep(CLI::App const& cmd) {
        resolve_workers(cmd);
        from_config(cmd, "--k", "k", m_k);
        from_config(cmd, "--models", "models", m_models);
        from_config(cmd, "--out", "out", m_output);
        if (cmd.count("--fields") == 0) {
            m_fields = "T,TD,TDN";
            from_config(cmd, "--fields", "fields", m_fields);
        }
        require_exists(m_index_dir, "index");
        require_exists(m_topics, "topics");
        require_exists(m_qrels, "qrels");
        if (m_k == 0 || m_workers == 0) {
            throw usage_error("--k and --workers must be >= 1");
        }

        std::vector<model_id> models;
        if (m_models == "all") {
            models = list_models();
        } else {
            for (auto const& name : split_list(m_models)) {
                models.push_back(require_model(name));
            }
        }
        std::vector<field_mode> modes;
        for (auto const& f : split_list(m_fields)) {
            auto mode = parse_field_mode(f);
            if (!mode) {
                throw usage_error("invalid field mode '" + f + "'");
            }
            modes.push_back(*mode);
        }
        if (models.empty() || modes.empty()) {
            throw usage_error("sweep needs at least one model and one field mode");
        }
        auto params = parse_params(m_config, m_params);
        std::filesystem::path out_dir = m_output.empty() ? "sweep" : m_output;
        std::filesystem::create_directories(out_dir);

        auto idx = load_index(m_index_dir);
        auto topics = parse_topics(read_file(m_topics));
        auto q = parse_qrels(read_file(m_qrels));

        std::vector<matrix_cell_run> cells;
        for (auto model : models) {
            for (auto mode : modes) {
                cells.push_back(matrix_cell_run{std::string(to_string(model)), mode, std::nullopt});
            }
        }
        std::vector<std::string> failures(cells.size());
        auto one = [&](std::size_t i) {
            auto& cell = cells[i];
            try {
                auto model = *parse_model_id(cell.model);
                auto tag = cell.model + "_" + std::string(to_string(cell.mode));
                auto run = run_topics(idx, model, params, topics, cell.mode, m_k, tag);
                write_text(out_dir / (tag + ".run"), write_run(run));
                cell.run = std::move(run);
            } catch (std::exception const& e) {
                failures[i] = e.what();
            }
        };
        std::size_t workers = std::min(m_workers, cells.size());
        if (workers <= 1) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                one(i);
            }
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> threads;
            for (std::size_t w = 0; w < workers; ++w) {
                threads.emplace_back([&] {
                    for (std::size_t i = next++; i < cells.size(); i = next++) {
                        one(i);
                    }
                });
            }
            for (auto& t : threads) {
                t.join();
            }
        }

        auto matrix = build_comparison_matrix(cells, q);
        write_text(out_dir / "matrix.txt", matrix.to_text());
        write_text(out_dir / "matrix.tsv", matrix.to_tsv());
        m_out << matrix.to_text();

        bool failed = false;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (!failures[i].empty()) {
                failed = true;
                m_err << "gir: sweep cell " << cells[i].model << "/" << to_string(cells[i].mode)
                      << " failed: " << failures[i] << "\n";
            }
        }
        return failed ? exit_runtime : exit_ok;
    }

    int cmd_synth() {
        if (m_synth.num_docs == 0 || m_synth.vocab_size < 16) {
            throw usage_error("--docs must be >= 1 and --vocab >= 16");
        }
        std::filesystem::path out_dir = m_output;
        std::filesystem::create_directories(out_dir);
        auto c = synthetic::generate(m_synth);
        write_text(out_dir / "collection.trec", serialize_documents(c.docs));
        write_text(out_dir / "topics.txt", write_topics(c.topics));
        write_text(out_dir / "qrels.txt", write_qrels(c.judgments));
        m_out << "docs=" << c.docs.size() << " topics=" << c.topics.size() << "\n";
        return exit_ok;
    }

    std::ostream& m_out;
    std::ostream& m_err;
    std::string m_config_path;
    config_map m_config;

    std::string m_collection;
    std::string m_index_dir;
    std::string m_stoplist;
    std::size_t m_workers = 1;
    std::size_t m_segment_docs = build_options{}.segment_docs;
    bool m_force = false;

    std::string m_topics;
    std::string m_model;
    std::string m_fields;
    std::size_t m_k = default_depth;
    std::string m_tag;
    std::vector<std::string> m_params;
    std::string m_output;

    std::string m_qrels;
    std::string m_run;
    std::string m_measures = "all";
    std::string m_curve;
    std::string m_format = "text";
    bool m_per_topic = false;

    std::string m_models = "all";
    synthetic::collection_config m_synth;
};

inline int run(std::vector<std::string> const& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    application app(out, err);
    return app.run(args);
}

}  // namespace gir::cli
