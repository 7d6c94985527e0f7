// End-to-end tests of the sizegraph binary. The test runner passes the
// binary's location in SIZEGRAPH_BIN.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "test_util.hpp"

using testutil::TempDir;

namespace {

struct RunResult {
    int status = -1;
    std::string out;
    std::string err;
};

const std::string& binary() {
    static const std::string path = [] {
        const char* env = std::getenv("SIZEGRAPH_BIN");
        REQUIRE_MESSAGE(env != nullptr, "SIZEGRAPH_BIN must point at the CLI");
        return std::string(env);
    }();
    return path;
}

RunResult run(const std::string& args, const TempDir& tmp) {
    const auto out_path = tmp.file("cmd_stdout");
    const auto err_path = tmp.file("cmd_stderr");
    const auto cmd = binary() + " " + args + " > " + out_path + " 2> " + err_path;
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = testutil::read_file(out_path);
    r.err = testutil::read_file(err_path);
    return r;
}

// Corpus whose co-occurrence graph is a triangle plus a pendant: 2-edge-
// connected fails, k = 1 works.
void write_small_corpus(const TempDir& tmp) {
    testutil::write_file(tmp.file("vocab.txt"), "ant\nbee\ncat\n");
    testutil::write_file(tmp.file("tags.tsv"),
                         "ant\tbee\nbee\tcat\nant\tcat\nant\tbee\tcat\n");
}

}  // namespace

TEST_CASE("help is help") {
    TempDir tmp;
    CHECK(run("--help", tmp).status == 0);
    for (const char* sub : {"graph", "ingest", "fit", "query", "eval", "synth"})
        CHECK(run(std::string(sub) + " --help", tmp).status == 0);
}

TEST_CASE("usage problems exit 1") {
    TempDir tmp;
    CHECK(run("", tmp).status == 1);                       // no subcommand
    CHECK(run("frobnicate", tmp).status == 1);             // unknown subcommand
    CHECK(run("graph --tags x.tsv", tmp).status == 1);     // missing required flags
    CHECK(run("synth --n 10 --out-dir " + tmp.file("w"), tmp).status == 1);  // no --seed
    write_small_corpus(tmp);
    CHECK(run("graph --tags " + tmp.file("tags.tsv") + " --vocab " + tmp.file("vocab.txt") +
                  " -k 1 -o " + tmp.file("g.json") + " --bogus",
              tmp).status == 1);
    // ingest with neither evidence file
    CHECK(run("ingest --graph " + tmp.file("g.json") + " -o " + tmp.file("o.jsonl"), tmp)
              .status == 1);
}

TEST_CASE("data problems exit 2") {
    TempDir tmp;
    write_small_corpus(tmp);
    // the triangle corpus cannot support two disjoint spanning trees
    auto r = run("graph --tags " + tmp.file("tags.tsv") + " --vocab " + tmp.file("vocab.txt") +
                     " -k 2 -o " + tmp.file("g.json"),
                 tmp);
    CHECK(r.status == 2);
    CHECK(r.err.find("disconnected") != std::string::npos);

    CHECK(run("fit --graph " + tmp.file("missing.json") + " --obs x -o y", tmp).status == 2);

    testutil::write_file(tmp.file("empty.tsv"), "\n");
    CHECK(run("graph --tags " + tmp.file("empty.tsv") + " --vocab " + tmp.file("vocab.txt") +
                  " -k 1 -o " + tmp.file("g.json"),
              tmp).status == 2);
}

TEST_CASE("graph subcommand reports the construction") {
    TempDir tmp;
    write_small_corpus(tmp);
    auto r = run("graph --tags " + tmp.file("tags.tsv") + " --vocab " + tmp.file("vocab.txt") +
                     " -k 1 -o " + tmp.file("g.json"),
                 tmp);
    CHECK(r.status == 0);
    CHECK(r.err.find("3 objects") != std::string::npos);
    CHECK(r.err.find("2 edges") != std::string::npos);
    CHECK(std::filesystem::exists(tmp.file("g.json")));
}

TEST_CASE("ingest converts and reports statistics") {
    TempDir tmp;
    write_small_corpus(tmp);
    REQUIRE(run("graph --tags " + tmp.file("tags.tsv") + " --vocab " + tmp.file("vocab.txt") +
                    " -k 1 -o " + tmp.file("g.json"),
                tmp).status == 0);

    // one good pair, one weak score, one textual claim, one broken line
    testutil::write_file(
        tmp.file("det.jsonl"),
        R"({"i":"ant","j":"bee","image":"im1","a":{"area_px":100,"depth":2,"score":0.9,"thresh":0.5},"b":{"area_px":50,"depth":2,"score":0.8,"thresh":0.5}})"
        "\n"
        R"({"i":"ant","j":"bee","image":"im2","a":{"area_px":90,"depth":2,"score":0.2,"thresh":0.5},"b":{"area_px":60,"depth":2,"score":0.8,"thresh":0.5}})"
        "\n"
        "this is not json\n");
    testutil::write_file(
        tmp.file("text.jsonl"),
        R"({"object":"cat","pattern":"tall","values":[{"v":30,"unit":"cm"}],"source":"s1"})"
        "\n"
        R"({"object":"cat","pattern":"tall","values":[{"v":12,"unit":"cubits"}],"source":"s2"})"
        "\n");

    auto r = run("ingest --graph " + tmp.file("g.json") + " --detections " + tmp.file("det.jsonl") +
                     " --textual " + tmp.file("text.jsonl") + " --scale linear -o " +
                     tmp.file("obs.jsonl"),
                 tmp);
    CHECK(r.status == 0);
    CHECK(r.err.find("line 3") != std::string::npos);  // the broken JSON line
    CHECK(r.err.find("visual: 1 kept, 1 low-score") != std::string::npos);
    CHECK(r.err.find("textual: 1 kept, 1 rejected") != std::string::npos);

    const auto obs = testutil::read_file(tmp.file("obs.jsonl"));
    CHECK(obs.find("\"kind\":\"visual\"") != std::string::npos);
    CHECK(obs.find("\"kind\":\"textual\"") != std::string::npos);

    // nothing survives: every record rejected -> data error
    testutil::write_file(
        tmp.file("weak.jsonl"),
        R"({"i":"ant","j":"bee","image":"im","a":{"area_px":90,"depth":2,"score":0.2,"thresh":0.5},"b":{"area_px":60,"depth":2,"score":0.8,"thresh":0.5}})"
        "\n");
    CHECK(run("ingest --graph " + tmp.file("g.json") + " --detections " + tmp.file("weak.jsonl") +
                  " -o " + tmp.file("none.jsonl"),
              tmp).status == 2);
}

TEST_CASE("the synthetic pipeline closes on itself") {
    TempDir tmp;
    const auto dir = tmp.file("world");
    auto r = run("synth --n 12 --k 2 --seed 4242 --obs-per-edge 20 --unary-per-node 6 "
                 "--pair-margin 0.5 --out-dir " + dir,
                 tmp);
    REQUIRE(r.status == 0);
    CHECK(r.err.find("12 objects") != std::string::npos);

    // rebuilding the graph from the synthetic corpus reproduces it byte for byte
    REQUIRE(run("graph --tags " + dir + "/tags.tsv --vocab " + dir + "/vocab.txt -k 2 -o " +
                    tmp.file("rebuilt.json"),
                tmp).status == 0);
    CHECK(testutil::read_file(tmp.file("rebuilt.json")) ==
          testutil::read_file(dir + "/graph.json"));

    REQUIRE(run("fit --graph " + dir + "/graph.json --obs " + dir + "/obs.jsonl -o " +
                    tmp.file("model.json"),
                tmp).status == 0);

    auto ev = run("eval --model " + tmp.file("model.json") + " --pairs " + dir +
                      "/pairs.csv --declaration-grid 0.25,0.5,1 -o " + tmp.file("metrics.csv"),
                  tmp);
    CHECK(ev.status == 0);
    const auto csv = testutil::read_file(tmp.file("metrics.csv"));
    CHECK(csv.rfind("metric,key,value\n", 0) == 0);
    CHECK(csv.find("overall,,") != std::string::npos);
    CHECK(csv.find("declaration,0.25,") != std::string::npos);

    // injection sweep reuses the world's own truth
    auto inj = run("eval --model " + tmp.file("model.json") + " --pairs " + dir +
                       "/pairs.csv --inject " + dir + "/truth.json --inject-counts 0,12 --graph " +
                       dir + "/graph.json --obs " + dir + "/obs.jsonl -o " +
                       tmp.file("inject.csv"),
                   tmp);
    CHECK(inj.status == 0);
    const auto icsv = testutil::read_file(tmp.file("inject.csv"));
    CHECK(icsv.find("injection,0,") != std::string::npos);
    CHECK(icsv.find("injection,12,1\n") != std::string::npos);  // full truth is perfect
}

TEST_CASE("query prints one well-formed line") {
    TempDir tmp;
    const auto dir = tmp.file("world");
    REQUIRE(run("synth --n 8 --k 1 --seed 99 --out-dir " + dir, tmp).status == 0);
    REQUIRE(run("fit --graph " + dir + "/graph.json --obs " + dir + "/obs.jsonl -o " +
                    tmp.file("model.json"),
                tmp).status == 0);

    auto r = run("query --model " + tmp.file("model.json") + " obj01 obj02", tmp);
    CHECK(r.status == 0);
    CHECK(r.out.rfind("P(obj01 > obj02) = 0.", 0) == 0);
    CHECK(r.out.find("decision=") != std::string::npos);
    CHECK(r.out.find("confidence=0.") != std::string::npos);
    CHECK(r.out.back() == '\n');

    // complementary probability when the arguments swap
    auto s = run("query --model " + tmp.file("model.json") + " obj02 obj01", tmp);
    CHECK(s.status == 0);
    const double p = std::stod(r.out.substr(r.out.find("= ") + 2));
    const double q = std::stod(s.out.substr(s.out.find("= ") + 2));
    CHECK(p + q == doctest::Approx(1.0).epsilon(2e-6));  // printed at 6 decimals

    CHECK(run("query --model " + tmp.file("model.json") + " obj01 walrus", tmp).status == 2);
    CHECK(run("query --model " + tmp.file("model.json") + " obj01 obj01", tmp).status == 2);
}

TEST_CASE("repeated runs are byte identical") {
    TempDir tmp;
    const auto d1 = tmp.file("w1");
    const auto d2 = tmp.file("w2");
    for (const auto& d : {d1, d2})
        REQUIRE(run("synth --n 10 --k 2 --seed 31415 --out-dir " + d, tmp).status == 0);
    for (const char* name :
         {"vocab.txt", "tags.tsv", "graph.json", "obs.jsonl", "pairs.csv", "truth.json"})
        CHECK(testutil::read_file(d1 + "/" + name) == testutil::read_file(d2 + "/" + name));

    for (int round = 0; round < 2; ++round)
        REQUIRE(run("fit --graph " + d1 + "/graph.json --obs " + d1 + "/obs.jsonl -o " +
                        tmp.file("m" + std::to_string(round) + ".json"),
                    tmp).status == 0);
    CHECK(testutil::read_file(tmp.file("m0.json")) == testutil::read_file(tmp.file("m1.json")));
}
