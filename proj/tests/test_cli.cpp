#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "gir_cli.hpp"

namespace fs = std::filesystem;

namespace {

struct result {
    int status;
    std::string out;
    std::string err;
};

result gir_run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    int status = gir::cli::run(args, out, err);
    return {status, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        static int counter = 0;
        m_dir = fs::temp_directory_path() / ("gir-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(m_dir);
        fs::create_directories(m_dir);
    }
    void TearDown() override { fs::remove_all(m_dir); }

    std::string path(std::string const& name) const { return (m_dir / name).string(); }

    std::string write(std::string const& name, std::string const& text) const {
        std::ofstream(m_dir / name, std::ios::binary) << text;
        return path(name);
    }

    static std::string slurp(std::string const& p) {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    std::string toy_index() {
        auto coll = write("toy.trec", "<DOC>\n<DOCNO>d1</DOCNO>\n<TEXT>a b a</TEXT>\n</DOC>\n"
                                      "<DOC>\n<DOCNO>d2</DOCNO>\n<TEXT>b c</TEXT>\n</DOC>\n");
        auto r = gir_run({"index", "--collection", coll, "--output", path("toy.idx")});
        EXPECT_EQ(r.status, 0) << r.err;
        return path("toy.idx");
    }

    fs::path m_dir;
};

}  // namespace

TEST_F(CliTest, IndexPrintsSummary) {
    auto coll = write("toy.trec", "<DOC><DOCNO>d1</DOCNO><TEXT>a b a</TEXT></DOC><DOC><DOCNO>d2</DOCNO><TEXT>b c</TEXT></DOC>");
    auto r = gir_run({"index", "--collection", coll, "--output", path("idx")});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "N=2 TC=5 avg_l=2.5 vocab=3\n");
    EXPECT_TRUE(fs::exists(path("idx") + "/postings.gir"));
}

TEST_F(CliTest, IndexReadsDirectoryOfFiles) {
    fs::create_directories(path("coll/sub"));
    write("coll/a.trec", "<DOC><DOCNO>d1</DOCNO><TEXT>a b a</TEXT></DOC>");
    write("coll/sub/b.trec", "<DOC><DOCNO>d2</DOCNO><TEXT>b c</TEXT></DOC>");
    auto r = gir_run({"index", "--collection", path("coll"), "--output", path("idx"), "--workers", "3"});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "N=2 TC=5 avg_l=2.5 vocab=3\n");
}

TEST_F(CliTest, IndexUsageAndRuntimeErrors) {
    auto r = gir_run({"index", "--collection", path("nowhere"), "--output", path("idx")});
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("Usage"), std::string::npos) << r.err;
    EXPECT_EQ(gir_run({"index", "--output", path("idx")}).status, 2);
    EXPECT_EQ(gir_run({}).status, 2);
    EXPECT_EQ(gir_run({"frobnicate"}).status, 2);

    auto bad = write("bad.trec", "<DOC><TEXT>no docno</TEXT></DOC>");
    r = gir_run({"index", "--collection", bad, "--output", path("idx")});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("DOCNO"), std::string::npos) << r.err;
    EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, IndexRefusesToOverwriteWithoutForce) {
    auto idx = toy_index();
    auto coll = path("toy.trec");
    auto r = gir_run({"index", "--collection", coll, "--output", idx});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("--force"), std::string::npos);
    EXPECT_EQ(gir_run({"index", "--collection", coll, "--output", idx, "--force"}).status, 0);
}

TEST_F(CliTest, IndexWithStoplist) {
    auto coll = write("toy.trec", "<DOC><DOCNO>d1</DOCNO><TEXT>a b a</TEXT></DOC><DOC><DOCNO>d2</DOCNO><TEXT>b c</TEXT></DOC>");
    auto stop = write("stop.txt", "# drop b\nb\n");
    auto r = gir_run({"index", "--collection", coll, "--output", path("idx"), "--stoplist", stop});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "N=2 TC=3 avg_l=1.5 vocab=2\n");
}

TEST_F(CliTest, SearchMatchesLibrary) {
    auto idx = toy_index();
    auto topics = write("topics.txt", "<top><num>1</num><title>a c</title></top>");
    auto r = gir_run({"search", "--index", idx, "--topics", topics, "--model", "TF_IDF", "--fields", "T"});
    ASSERT_EQ(r.status, 0) << r.err;

    auto index = gir::load_index(idx);
    auto run = gir::run_topics(index, gir::model_id::TF_IDF, {}, gir::parse_topics(slurp(topics)),
                               gir::field_mode::T, 1000, "TF_IDF");
    EXPECT_EQ(r.out, gir::write_run(run));
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 2);
    EXPECT_TRUE(r.out.starts_with("1 Q0 "));
}

TEST_F(CliTest, SearchUnknownModelListsAllIds) {
    auto idx = toy_index();
    auto topics = write("topics.txt", "<top><num>1</num><title>a</title></top>");
    auto r = gir_run({"search", "--index", idx, "--topics", topics, "--model", "BM11", "--fields", "T"});
    EXPECT_EQ(r.status, 1);
    for (auto id : gir::list_models()) {
        EXPECT_NE(r.err.find(std::string(gir::to_string(id))), std::string::npos) << gir::to_string(id);
    }
}

TEST_F(CliTest, SearchTdnWithEmptyNarrativeEqualsTd) {
    auto idx = toy_index();
    auto topics = write("topics.txt", "<top><num>1</num><title>a</title><desc>c</desc><narr></narr></top>");
    auto td = gir_run({"search", "--index", idx, "--topics", topics, "--model", "InL2", "--fields", "TD"});
    auto tdn = gir_run({"search", "--index", idx, "--topics", topics, "--model", "InL2", "--fields", "TDN"});
    ASSERT_EQ(td.status, 0);
    EXPECT_EQ(td.out, tdn.out);
    EXPECT_FALSE(td.out.empty());
}

TEST_F(CliTest, SearchOptionsAndErrors) {
    auto idx = toy_index();
    auto topics = write("topics.txt", "<top><num>1</num><title>a b</title></top>");
    auto r = gir_run({"search", "--index", idx, "--topics", topics, "--model", "BM25", "--fields", "T", "--k", "1",
                      "--tag", "mine", "--param", "k1=2.0", "--output", path("out.run")});
    ASSERT_EQ(r.status, 0) << r.err;
    auto text = slurp(path("out.run"));
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
    EXPECT_TRUE(text.ends_with(" mine\n"));

    EXPECT_EQ(gir_run({"search", "--index", idx, "--topics", topics, "--model", "BM25", "--fields", "X"}).status, 2);
    EXPECT_EQ(gir_run({"search", "--index", idx, "--topics", topics, "--model", "BM25", "--fields", "T", "--k", "0"}).status, 2);
    EXPECT_EQ(gir_run({"search", "--index", idx, "--topics", topics, "--model", "BM25", "--fields", "T", "--param", "zeta=1"}).status, 2);
    EXPECT_EQ(gir_run({"search", "--index", path("none"), "--topics", topics, "--model", "BM25", "--fields", "T"}).status, 2);

    // A corrupted index is a runtime failure with a checksum message.
    auto postings = idx + "/postings.gir";
    auto bytes = slurp(postings);
    bytes[bytes.size() - 1] ^= 0x01;
    std::ofstream(postings, std::ios::binary | std::ios::trunc) << bytes;
    r = gir_run({"search", "--index", idx, "--topics", topics, "--model", "BM25", "--fields", "T"});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("checksum"), std::string::npos) << r.err;
}

TEST_F(CliTest, ConfigFileSuppliesDefaultsFlagsWin) {
    auto idx = toy_index();
    auto topics = write("topics.txt", "<top><num>1</num><title>a b</title></top>");
    auto conf = write("gir.conf", "# experiment\nk = 1\ntag = fromconf\n");
    auto r = gir_run({"--config", conf, "search", "--index", idx, "--topics", topics, "--model", "BM25", "--fields", "T"});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
    EXPECT_TRUE(r.out.ends_with(" fromconf\n"));
    r = gir_run({"--config", conf, "search", "--index", idx, "--topics", topics, "--model", "BM25", "--fields", "T",
                 "--k", "5", "--tag", "flag"});
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 2);
    EXPECT_TRUE(r.out.ends_with(" flag\n"));
    EXPECT_EQ(gir_run({"--config", path("missing.conf"), "search", "--index", idx, "--topics", topics, "--model",
                       "BM25", "--fields", "T"}).status,
              2);
}

TEST_F(CliTest, EvaluatePerfectAndBprefFixtures) {
    auto qrels = write("qrels.txt", "1 0 d0 0\n1 0 d1 1\n1 0 d2 0\n1 0 d3 1\n2 0 x 1\n");
    auto perfect = write("perfect.run", "2 Q0 x 1 1.0 t\n");
    auto r = gir_run({"evaluate", "--qrels", qrels, "--run", perfect});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_TRUE(std::regex_search(r.out, std::regex("(^|\\n)map +all +1\\.0000\\n"))) << r.out;
    EXPECT_TRUE(std::regex_search(r.out, std::regex("(^|\\n)bpref +all +1\\.0000\\n"))) << r.out;
    EXPECT_TRUE(std::regex_search(r.out, std::regex("(^|\\n)recip_rank +all +1\\.0000\\n"))) << r.out;

    auto bp = write("bpref.run", "1 Q0 d0 1 4.0 t\n1 Q0 d1 2 3.0 t\n1 Q0 d2 3 2.0 t\n1 Q0 d3 4 1.0 t\n");
    r = gir_run({"evaluate", "--qrels", qrels, "--run", bp, "--measures", "bpref", "--format", "tsv"});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "bpref\tall\t0.2500\n");
    r = gir_run({"evaluate", "--qrels", qrels, "--run", bp, "--measures", "bpref,map", "--format", "tsv", "-q"});
    EXPECT_EQ(r.out, "map\t1\t0.5000\nbpref\t1\t0.2500\nmap\tall\t0.5000\nbpref\tall\t0.2500\n");
}

TEST_F(CliTest, EvaluateCurveAndErrors) {
    auto qrels = write("qrels.txt", "1 0 a 1\n1 0 b 0\n1 0 c 1\n");
    auto run = write("r.run", "1 Q0 a 1 3.0 t\n1 Q0 b 2 2.0 t\n1 Q0 c 3 1.0 t\n");
    auto r = gir_run({"evaluate", "--qrels", qrels, "--run", run, "--curve", path("curve.tsv")});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(slurp(path("curve.tsv")),
              "0.0\t1.0000\n0.1\t1.0000\n0.2\t1.0000\n0.3\t1.0000\n0.4\t1.0000\n0.5\t1.0000\n"
              "0.6\t0.6667\n0.7\t0.6667\n0.8\t0.6667\n0.9\t0.6667\n1.0\t0.6667\n");

    auto other = write("o.run", "9 Q0 a 1 3.0 t\n");
    r = gir_run({"evaluate", "--qrels", qrels, "--run", other});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("share no topics"), std::string::npos);
    EXPECT_EQ(gir_run({"evaluate", "--qrels", qrels, "--run", run, "--measures", "ndcg"}).status, 2);
    EXPECT_EQ(gir_run({"evaluate", "--qrels", qrels, "--run", run, "--format", "xml"}).status, 2);
    auto malformed = write("m.run", "1 Q0 a 1\n");
    EXPECT_EQ(gir_run({"evaluate", "--qrels", qrels, "--run", malformed}).status, 1);
}

TEST_F(CliTest, SweepShapesAndDeterminism) {
    auto r = gir_run({"synth", "--out", path("c"), "--docs", "300", "--topics", "4", "--vocab", "800"});
    ASSERT_EQ(r.status, 0) << r.err;
    r = gir_run({"index", "--collection", path("c/collection.trec"), "--output", path("idx")});
    ASSERT_EQ(r.status, 0) << r.err;

    r = gir_run({"sweep", "--index", path("idx"), "--topics", path("c/topics.txt"), "--qrels", path("c/qrels.txt"),
                 "--out", path("all")});
    ASSERT_EQ(r.status, 0) << r.err;
    std::size_t runs = 0;
    for (auto const& e : fs::directory_iterator(path("all"))) {
        runs += e.path().extension() == ".run" ? 1 : 0;
    }
    EXPECT_EQ(runs, 51U);
    auto tsv = slurp(path("all/matrix.tsv"));
    EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 18);
    EXPECT_TRUE(tsv.starts_with("model\tT\tTD\tTDN\n"));
    EXPECT_EQ(tsv.find("NA"), std::string::npos);

    r = gir_run({"sweep", "--index", path("idx"), "--topics", path("c/topics.txt"), "--qrels", path("c/qrels.txt"),
                 "--models", "TF_IDF,InL2,In_expC2", "--out", path("three"), "--workers", "4"});
    ASSERT_EQ(r.status, 0) << r.err;
    auto three = slurp(path("three/matrix.tsv"));
    EXPECT_EQ(std::count(three.begin(), three.end(), '\n'), 4);
    for (auto name : {"TF_IDF_T.run", "InL2_TD.run", "In_expC2_TDN.run"}) {
        EXPECT_EQ(slurp(path("three/") + name), slurp(path("all/") + name)) << name;
    }

    r = gir_run({"sweep", "--index", path("idx"), "--topics", path("c/topics.txt"), "--qrels", path("c/qrels.txt"),
                 "--fields", "T", "--out", path("t")});
    ASSERT_EQ(r.status, 0) << r.err;
    auto t = slurp(path("t/matrix.tsv"));
    EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 18);
    EXPECT_TRUE(t.starts_with("model\tT\n"));
    EXPECT_EQ(gir_run({"sweep", "--index", path("idx"), "--topics", path("c/topics.txt"), "--qrels",
                       path("c/qrels.txt"), "--models", "BM11"}).status,
              1);
}

TEST_F(CliTest, SynthIsDeterministic) {
    ASSERT_EQ(gir_run({"synth", "--out", path("a"), "--docs", "50", "--seed", "5"}).status, 0);
    ASSERT_EQ(gir_run({"synth", "--out", path("b"), "--docs", "50", "--seed", "5"}).status, 0);
    for (auto name : {"collection.trec", "topics.txt", "qrels.txt"}) {
        EXPECT_EQ(slurp(path("a/") + name), slurp(path("b/") + name));
    }
    EXPECT_EQ(gir_run({"synth", "--out", path("c"), "--docs", "0"}).status, 2);
}
