#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support/corpus.hpp"
#include "support/generators.hpp"
#include "support/suite.hpp"
#include "tabgls/cli.hpp"
#include "tabgls/text.hpp"

using namespace tabgls;
using testsupport::read_file;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "tabgls");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& p) {
    std::vector<nlohmann::json> out;
    for (const auto& line : text::split_lines(read_file(p))) {
        if (!line.empty()) out.push_back(nlohmann::json::parse(line));
    }
    return out;
}

std::size_t count_files(const std::filesystem::path& dir) {
    std::size_t n = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) n += e.is_regular_file();
    return n;
}

std::string take_lines(const std::string& s, std::size_t n) {
    std::string out;
    std::istringstream in(s);
    std::string line;
    while (n-- > 0 && std::getline(in, line)) out += line + "\n";
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("datagen over 100 tables reports 100 per kind") {
    TempDir dir;
    write_file(dir / "corpus.jsonl", testsupport::random_corpus(100, 11));
    auto r = run({"datagen", "--corpus", (dir / "corpus.jsonl").string(), "--out", (dir / "data.jsonl").string(),
                  "--seed", "7"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("instances: 300") != std::string::npos);
    auto manifest = nlohmann::json::parse(read_file(dir / "data.jsonl.manifest.json"));
    CHECK(manifest["per_kind"]["structure"] == 100);
    CHECK(manifest["per_kind"]["content_global"] == 100);
    CHECK(manifest["per_kind"]["content_local"] == 100);
    CHECK(read_jsonl(dir / "data.jsonl").size() == 300);
}

TEST_CASE("datagen skips, logs and counts a corrupt line") {
    TempDir dir;
    write_file(dir / "corpus.jsonl", testsupport::random_corpus(120, 3) + "{not json\n");
    auto r = run({"datagen", "--corpus", (dir / "corpus.jsonl").string(), "--out", (dir / "data.jsonl").string(),
                  "--seed", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("[warning]") != std::string::npos);
    auto manifest = nlohmann::json::parse(read_file(dir / "data.jsonl.manifest.json"));
    CHECK(manifest["skipped"] == 1);
    CHECK(manifest["tables"] == 120);
}

TEST_CASE("datagen fails with a data exit code past the skip threshold") {
    TempDir dir;
    write_file(dir / "corpus.jsonl", testsupport::random_corpus(5, 3) + "{not json\n");
    auto r = run({"datagen", "--corpus", (dir / "corpus.jsonl").string(), "--out", (dir / "data.jsonl").string(),
                  "--seed", "1"});
    CHECK(r.code == 2);
    CHECK(r.out.find("manifest:") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "data.jsonl.manifest.json"));
}

TEST_CASE("datagen without a seed is a usage error") {
    TempDir dir;
    write_file(dir / "corpus.jsonl", testsupport::random_corpus(3, 3));
    auto r = run({"datagen", "--corpus", (dir / "corpus.jsonl").string(), "--out", (dir / "data.jsonl").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("seed") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "data.jsonl"));
}

TEST_CASE("config supplies values and flags override them") {
    TempDir dir;
    write_file(dir / "corpus.jsonl", testsupport::random_corpus(4, 3));
    write_file(dir / "run.ini", "[datagen]\nseed = 9\nlocal_per_table = 2\nplaceholder = \"MASK\"\n\n[paths]\ncorpus = \"" +
                                    (dir / "corpus.jsonl").string() + "\"\ndataset = \"" + (dir / "a.jsonl").string() + "\"\n");
    auto a = run({"datagen", "--config", (dir / "run.ini").string()});
    REQUIRE(a.code == 0);
    auto data = read_jsonl(dir / "a.jsonl");
    CHECK(data.size() == 16);
    CHECK(data[0]["target"].get<std::string>().find("MASK") != std::string::npos);

    auto b = run({"datagen", "--config", (dir / "run.ini").string(), "--out", (dir / "b.jsonl").string(),
                  "--local-per-table", "1"});
    REQUIRE(b.code == 0);
    CHECK(read_jsonl(dir / "b.jsonl").size() == 12);
    CHECK(nlohmann::json::parse(read_file(dir / "b.jsonl.manifest.json"))["seed"] == 9);
}

TEST_CASE("shipped example config loads") {
    const auto c = cli::load_config(TABGLS_EXAMPLE_CONFIG);
    CHECK(c.backend == gateway::BackendKind::remote);
    CHECK(c.mode == pipeline::Mode::gls);
    CHECK(c.seed == 42u);
    CHECK(c.concurrency == 8u);
    CHECK(c.placeholder == "[table content]");
    CHECK(c.report == std::filesystem::path("runs/report.json"));
}

TEST_CASE("bad config is a usage error") {
    TempDir dir;
    write_file(dir / "bad.ini", "[datagen]\nsede = 1\n");
    CHECK(run({"datagen", "--config", (dir / "bad.ini").string()}).code == 1);
    write_file(dir / "bad2.ini", "[backend]\nconcurrency = 0\n");
    CHECK(run({"infer", "--config", (dir / "bad2.ini").string()}).code == 1);
    CHECK(run({"infer", "--config", (dir / "missing.ini").string()}).code == 1);
}

TEST_CASE("usage errors exit with 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"infer", "--mode", "sideways", "--backend", "oracle"}).code == 1);
    CHECK(run({"infer", "--backend", "telepathy"}).code == 1);
    CHECK(run({"infer", "--concurrency", "0"}).code == 1);
    CHECK(run({"datagen", "--seed", "-3"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("remote backend without a credential is a config error") {
    TempDir dir;
    auto suite = testsupport::write_suite(dir.path(), 2, 1);
    ::unsetenv("TABGLS_CLI_TEST_KEY");
    auto r = run({"infer", "--backend", "remote", "--endpoint", "http://127.0.0.1:9/v1/chat/completions",
                  "--api-key-env", "TABGLS_CLI_TEST_KEY", "--examples", suite.examples.string(), "--out",
                  (dir / "p.jsonl").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("TABGLS_CLI_TEST_KEY") != std::string::npos);
}

TEST_CASE("oracle infer on 50 questions then eval scores 1.0") {
    TempDir dir;
    auto suite = testsupport::write_suite(dir / "suite", 50, 4);
    auto r = run({"infer", "--backend", "oracle", "--derivations", suite.derivations.string(), "--examples",
                  suite.examples.string(), "--out", (dir / "preds.jsonl").string(), "--mode", "gls"});
    REQUIRE(r.code == 0);
    auto preds = read_jsonl(dir / "preds.jsonl");
    REQUIRE(preds.size() == 50);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        CHECK(preds[i]["id"] == suite.questions[i].id);
        CHECK(preds[i]["failed"] == false);
        CHECK(preds[i]["transcripts"].size() == 3);
    }
    CHECK(r.out.find("failed: 0") != std::string::npos);

    auto e = run({"eval", "--predictions", (dir / "preds.jsonl").string(), "--golds", suite.golds.string(), "--report",
                  (dir / "report.json").string()});
    REQUIRE(e.code == 0);
    auto report = nlohmann::json::parse(read_file(dir / "report.json"));
    CHECK(report["overall_exact"] == "1");
    CHECK(report["per_task"]["tqa"]["n"] == 50);
    CHECK(read_file(dir / "report.json.txt") == e.out);
}

TEST_CASE("direct mode makes exactly one call per example") {
    TempDir dir;
    auto suite = testsupport::write_suite(dir / "suite", 20, 6);
    auto r = run({"infer", "--backend", "oracle", "--derivations", suite.derivations.string(), "--examples",
                  suite.examples.string(), "--out", (dir / "preds.jsonl").string(), "--mode", "direct", "--cache-dir",
                  (dir / "cache").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("model calls: 20 ") != std::string::npos);
    CHECK(count_files(dir / "cache") == 20);
    for (const auto& p : read_jsonl(dir / "preds.jsonl")) {
        REQUIRE(p["transcripts"].size() == 1);
        CHECK(p["transcripts"][0]["stage"] == "direct");
    }
}

TEST_CASE("interrupted infer resumes from the cache with identical output") {
    TempDir dir;
    auto suite = testsupport::write_suite(dir / "suite", 30, 8);
    const auto all = read_file(suite.examples);
    write_file(dir / "partial.jsonl", take_lines(all, 12));
    const auto cache = (dir / "cache").string();
    auto infer = [&](const std::filesystem::path& examples, const std::filesystem::path& out,
                     std::optional<std::string> cache_dir) {
        std::vector<std::string> args{"infer", "--backend", "oracle", "--derivations", suite.derivations.string(),
                                      "--examples", examples.string(), "--out", out.string(), "--concurrency", "3"};
        if (cache_dir) {
            args.push_back("--cache-dir");
            args.push_back(*cache_dir);
        }
        return run(args);
    };
    REQUIRE(infer(dir / "partial.jsonl", dir / "partial_preds.jsonl", cache).code == 0);
    auto resumed = infer(suite.examples, dir / "resumed.jsonl", cache);
    REQUIRE(resumed.code == 0);
    CHECK(resumed.out.find("cache hits: 36") != std::string::npos);
    REQUIRE(infer(suite.examples, dir / "fresh.jsonl", std::nullopt).code == 0);
    CHECK(read_file(dir / "resumed.jsonl") == read_file(dir / "fresh.jsonl"));

    auto again = infer(suite.examples, dir / "again.jsonl", cache);
    CHECK(again.out.find("cache hits: 90") != std::string::npos);
    CHECK(read_file(dir / "again.jsonl") == read_file(dir / "fresh.jsonl"));
}

TEST_CASE("datagen and oracle infer are byte-identical across runs") {
    TempDir dir;
    write_file(dir / "corpus.jsonl", testsupport::random_corpus(40, 21, 5, true));
    for (const auto* name : {"a.jsonl", "b.jsonl"}) {
        REQUIRE(run({"datagen", "--corpus", (dir / "corpus.jsonl").string(), "--out", (dir / name).string(), "--seed",
                     "123"}).code == 0);
    }
    CHECK(read_file(dir / "a.jsonl") == read_file(dir / "b.jsonl"));

    auto suite = testsupport::write_suite(dir / "suite", 15, 2);
    for (const auto* name : {"p1.jsonl", "p2.jsonl"}) {
        REQUIRE(run({"infer", "--backend", "oracle", "--derivations", suite.derivations.string(), "--examples",
                     suite.examples.string(), "--out", (dir / name).string(), "--concurrency", "4"}).code == 0);
    }
    CHECK(read_file(dir / "p1.jsonl") == read_file(dir / "p2.jsonl"));
}

TEST_CASE("empty predictions against golds is a data error") {
    TempDir dir;
    auto suite = testsupport::write_suite(dir / "suite", 5, 2);
    write_file(dir / "empty.jsonl", "");
    auto r = run({"eval", "--predictions", (dir / "empty.jsonl").string(), "--golds", suite.golds.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("missing") != std::string::npos);
}

TEST_CASE("mixed eval fixture matches hand-computed scores") {
    TempDir dir;
    write_file(dir / "golds.jsonl",
               R"({"id":"a","task":"tqa","gold":"Paris"})"
               "\n"
               R"({"id":"b","task":"tqa","gold":"12"})"
               "\n"
               R"({"id":"c","task":"tcl","gold":[[1,1],[1,2],[2,1]]})"
               "\n");
    write_file(dir / "preds.jsonl",
               R"({"id":"a","mode":"gls","answer":"paris.","failed":false})"
               "\n"
               R"({"id":"b","mode":"gls","answer":"13","failed":false})"
               "\n"
               R"({"id":"c","mode":"gls","answer":"[[1,1],[1,2],[2,2]]","failed":false})"
               "\n");
    auto r = run({"eval", "--predictions", (dir / "preds.jsonl").string(), "--golds", (dir / "golds.jsonl").string(),
                  "--report", (dir / "r.json").string()});
    REQUIRE(r.code == 0);
    auto report = nlohmann::json::parse(read_file(dir / "r.json"));
    // tqa: 1 of 2 correct; tcl: 2 of 3 matched on both sides
    CHECK(report["per_task"]["tqa"]["exact"]["primary"] == "1/2");
    CHECK(report["per_task"]["tcl"]["exact"]["primary"] == "2/3");
    CHECK(report["overall_exact"] == "7/12");
}

TEST_CASE("exhausted scripted backend exits with the backend code") {
    TempDir dir;
    auto suite = testsupport::write_suite(dir / "suite", 3, 2);
    write_file(dir / "script.json", R"({"direct": ["1"]})");
    auto r = run({"infer", "--backend", "scripted", "--script", (dir / "script.json").string(), "--examples",
                  suite.examples.string(), "--out", (dir / "p.jsonl").string(), "--mode", "direct"});
    CHECK(r.code == 3);
}

TEST_CASE("missing examples file is a data error") {
    TempDir dir;
    auto suite = testsupport::write_suite(dir / "suite", 1, 2);
    auto r = run({"infer", "--backend", "oracle", "--derivations", suite.derivations.string(), "--examples",
                  (dir / "nope.jsonl").string(), "--out", (dir / "p.jsonl").string()});
    CHECK(r.code == 2);
}

TEST_CASE("report shows the mean completion tokens of scripted usage") {
    TempDir dir;
    auto suite = testsupport::write_suite(dir / "suite", 3, 2);
    write_file(dir / "script.json", R"({"direct": [
        {"text": "{\"answer\": \"a\"}", "usage": {"prompt_tokens": 10, "completion_tokens": 100}},
        {"text": "{\"answer\": \"b\"}", "usage": {"prompt_tokens": 10, "completion_tokens": 200}},
        {"text": "{\"answer\": \"c\"}", "usage": {"prompt_tokens": 10, "completion_tokens": 300}}]})");
    REQUIRE(run({"infer", "--backend", "scripted", "--script", (dir / "script.json").string(), "--examples",
                 suite.examples.string(), "--out", (dir / "p.jsonl").string(), "--mode", "direct"}).code == 0);
    auto r = run({"report", "--predictions", (dir / "p.jsonl").string(), "--out", (dir / "tokens.json").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("200.00") != std::string::npos);
    auto j = nlohmann::json::parse(read_file(dir / "tokens.json"));
    CHECK(j["direct"]["mean_completion_tokens_exact"] == "200");
    CHECK(j["direct"]["examples"] == 3);
}

}
