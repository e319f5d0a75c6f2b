#include <doctest.h>

#include <algorithm>
#include <random>

#include "support/generators.hpp"
#include "tabgls/errors.hpp"
#include "tabgls/eval.hpp"

using namespace tabgls;
using namespace tabgls::eval;

namespace {

PredictionInput pred(std::string id, std::string answer, bool failed = false) {
    return PredictionInput{std::move(id), "gls", std::move(answer), failed, std::nullopt};
}

GoldRecord gold(std::string id, const std::string& task, nlohmann::json payload) {
    return gold_from_json({{"id", std::move(id)}, {"task", task}, {"gold", std::move(payload)}});
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("normalize_answer fixtures") {
    CHECK(normalize_answer(" Paris. ") == "paris");
    CHECK(normalize_answer("1,234.0") == "1234");
    CHECK(normalize_answer("") == "");
    CHECK(normalize_answer("\"New   York\"") == "new york");
    CHECK(normalize_answer("5.0") == "5");
    CHECK(normalize_answer("$1,000") == "1000");
    CHECK(normalize_answer("45%") == "45");
    CHECK(normalize_answer("0.50") == "0.5");
    CHECK(normalize_answer("-0.0") == "0");
    CHECK(normalize_answer("007") == "7");
    CHECK(normalize_answer("1,23") == "1,23");
    CHECK(normalize_answer("'\"x\".'") == "x");
    auto d = normalize_answer_detailed("$12.50");
    CHECK(d.text == "12.5");
    CHECK(d.had_currency);
    CHECK_FALSE(d.had_percent);
    CHECK(normalize_answer_detailed("%3").had_percent);
}

TEST_CASE("normalize_answer is idempotent") {
    std::mt19937_64 rng(5);
    const std::string alphabet = "aB9 ,.$%'\"-0";
    for (int i = 0; i < 20000; ++i) {
        std::string s;
        const auto len = rng() % 10;
        for (std::size_t k = 0; k < len; ++k) s += alphabet[rng() % alphabet.size()];
        const auto once = normalize_answer(s);
        CHECK_MESSAGE(normalize_answer(once) == once, "input: [" << s << "]");
    }
}

TEST_CASE("tsd scoring") {
    CHECK(eval_tsd(std::make_pair(5, 3), {5, 4}).row == 1);
    CHECK(eval_tsd(std::make_pair(5, 3), {5, 4}).col == 0);
    auto both = eval_tsd(std::make_pair(5, 4), {5, 4});
    CHECK((both.row == 1 && both.col == 1));
    auto none = eval_tsd(std::nullopt, {5, 4});
    CHECK((none.row == 0 && none.col == 0));
    CHECK(parse_tsd_prediction("The table has 5 rows and 4 columns.") == std::make_pair(5, 4));
    CHECK(parse_tsd_prediction("{\"rows\": 3, \"columns\": 2}") == std::make_pair(3, 2));
    CHECK(parse_tsd_prediction("7 x 8") == std::make_pair(7, 8));
    CHECK_FALSE(parse_tsd_prediction("no idea").has_value());
}

TEST_CASE("cell accuracy") {
    CHECK(eval_cell_accuracy({"a", "b", "x"}, {"a", "b", "c"}) == Rational(2, 3));
    CHECK(eval_cell_accuracy({"a", "b", "c"}, {"a", "b", "c"}) == Rational(1));
    CHECK(eval_cell_accuracy({}, {"a", "b", "c"}) == Rational(0));
    CHECK(eval_cell_accuracy({"A.", "1,000"}, {"a", "1000"}) == Rational(1));
}

TEST_CASE("cell accuracy equals mean of per-position qa") {
    std::mt19937_64 rng(9);
    const std::vector<std::string> pool{"a", "A", "b", "1,000", "1000", "x."};
    for (int it = 0; it < 500; ++it) {
        std::vector<std::string> p;
        std::vector<std::string> g;
        const auto n = 1 + rng() % 5;
        for (std::size_t i = 0; i < n; ++i) g.push_back(pool[rng() % pool.size()]);
        const auto m = rng() % 6;
        for (std::size_t i = 0; i < m; ++i) p.push_back(pool[rng() % pool.size()]);
        long hits = 0;
        for (std::size_t i = 0; i < n; ++i) hits += i < p.size() ? eval_qa(p[i], {g[i]}) : 0;
        CHECK(eval_cell_accuracy(p, g) == Rational(hits, static_cast<long>(n)));
    }
}

TEST_CASE("cell f1 fixtures") {
    auto s = eval_cell_f1({"a", "b", "d"}, {"a", "b", "c"});
    CHECK(s.precision == Rational(2, 3));
    CHECK(s.recall == Rational(2, 3));
    CHECK(s.f1 == Rational(2, 3));
    CHECK(eval_cell_f1({"a", "b"}, {"a", "b"}).f1 == Rational(1));
    CHECK(eval_cell_f1({}, {"a"}).f1 == Rational(0));
    CHECK(eval_cell_f1({}, {"a"}).precision == Rational(0));
}

TEST_CASE("cell f1: identity and monotonicity by enumeration") {
    const std::vector<std::string> universe{"a", "b", "c", "d", "e", "f", "g", "h"};
    std::vector<std::vector<std::string>> sets;
    for (unsigned mask = 0; mask < 256; ++mask) {
        if (__builtin_popcount(mask) > 4) continue;
        std::vector<std::string> s;
        for (unsigned i = 0; i < 8; ++i)
            if (mask & (1u << i)) s.push_back(universe[i]);
        sets.push_back(s);
    }
    // For fixed (|p|, |g|), F1 must grow strictly with the overlap.
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, Rational> by_overlap;
    for (const auto& p : sets) {
        if (!p.empty()) {
            auto self = eval_cell_f1(p, p);
            CHECK((self.precision == 1 && self.recall == 1 && self.f1 == 1));
        }
        for (const auto& g : sets) {
            std::vector<std::string> common;
            std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(common));
            const auto key = std::make_tuple(p.size(), g.size(), common.size());
            const auto f1 = eval_cell_f1(p, g).f1;
            auto [it, inserted] = by_overlap.emplace(key, f1);
            if (!inserted) CHECK(it->second == f1);
        }
    }
    for (const auto& [key, f1] : by_overlap) {
        auto [np, ng, k] = key;
        auto next = by_overlap.find({np, ng, k + 1});
        if (next != by_overlap.end()) CHECK(next->second > f1);
    }
}

TEST_CASE("qa and tfv") {
    CHECK(eval_qa("Paris", {"paris"}) == 1);
    CHECK(eval_qa("1,234", {"1234"}) == 1);
    CHECK(eval_qa("Lyon", {"paris"}) == 0);
    CHECK(eval_qa("b, a", {"a", "b"}) == 1);
    CHECK(eval_qa("[\"a\", \"b\"]", {"b", "a"}) == 1);
    CHECK(eval_qa("a", {"a", "b"}) == 0);
    CHECK(eval_tfv("true", "entailed") == 1);
    CHECK(eval_tfv("No", "refuted") == 1);
    CHECK(eval_tfv("yes", "refuted") == 0);
    TfvLabels custom;
    custom.supports = {"supported"};
    CHECK(eval_tfv("true", "supported", custom) == 0);
}

TEST_CASE("prediction parsers") {
    CHECK(parse_list_prediction("[\"a\", 3]") == std::vector<std::string>{"a", "3"});
    CHECK(parse_list_prediction("Row 1 Column 1: a\nRow 1 Column 2: b") == std::vector<std::string>{"a", "b"});
    CHECK(parse_list_prediction("a | b | c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(parse_index_prediction("[[1, 2], [3, 4]]") == std::vector<std::string>{"(1, 2)", "(3, 4)"});
    CHECK(parse_index_prediction("Row 2, Column 5 and (7,1)") == std::vector<std::string>{"(2, 5)", "(7, 1)"});
    CHECK(parse_region_prediction("[[1,1,2,1]]") == std::vector<std::string>{"(1, 1, 2, 1)"});
    CHECK(parse_region_prediction("merged: (1, 2, 1, 3)") == std::vector<std::string>{"(1, 2, 1, 3)"});
}

TEST_CASE("gold payload validation") {
    CHECK_THROWS_AS(gold("1", "tsd", "5x4"), DataError);
    CHECK_THROWS_AS(gold("1", "tcl", {{1}}), DataError);
    CHECK_THROWS_AS(gold("1", "bogus", "x"), DataError);
    CHECK_THROWS_AS(gold("1", "tqa", nlohmann::json::array()), DataError);
    CHECK(gold("1", "tsd", {{"rows", 3}, {"columns", 2}}).gold == nlohmann::json::array({3, 2}));
    CHECK(gold("1", "tqa", 42).gold == nlohmann::json::array({"42"}));
}

TEST_CASE("aggregate: tsd row accuracy 0.5") {
    std::vector<GoldRecord> golds{gold("1", "tsd", {5, 4}), gold("2", "tsd", {3, 3})};
    std::vector<PredictionInput> preds{pred("1", "5 rows and 2 columns"), pred("2", "4 rows and 1 columns")};
    auto r = aggregate(preds, golds);
    CHECK(r.per_task.at(Task::tsd).metrics.at("row_accuracy") == Rational(1, 2));
    CHECK(r.per_task.at(Task::tsd).metrics.at("col_accuracy") == Rational(0));
    CHECK(r.overall == Rational(1, 4));
}

TEST_CASE("aggregate: mixed fixture matches hand computation") {
    std::vector<GoldRecord> golds{
        gold("t1", "tqa", "Paris"),        gold("t2", "tqa", "41"),
        gold("v1", "tfv", "entailed"),     gold("c1", "tce", {"a", "b", "c"}),
        gold("l1", "tcl", {{1, 1}, {2, 3}}), gold("m1", "mcd", {{1, 1, 1, 2}, {2, 1, 2, 1}}),
        gold("r1", "rce_row", {"a", "b", "c"}), gold("k1", "rce_col", {"x", "y"}),
    };
    std::vector<PredictionInput> preds{
        pred("t1", "paris"),
        pred("t2", "42"),
        pred("v1", "True"),
        pred("c1", "[\"a\", \"b\", \"x\"]"),
        pred("l1", "[[1, 1], [3, 2]]"),
        pred("m1", "[[1, 1, 1, 2]]"),
        pred("r1", "a | b | d"),
        pred("k1", "", true),
    };
    auto r = aggregate(preds, golds);
    CHECK(r.per_task.at(Task::tqa).primary == Rational(1, 2));
    CHECK(r.per_task.at(Task::tfv).primary == Rational(1));
    CHECK(r.per_task.at(Task::tce).primary == Rational(2, 3));
    CHECK(r.per_task.at(Task::tcl).primary == Rational(1, 2));
    CHECK(r.per_task.at(Task::mcd).metrics.at("precision") == Rational(1));
    CHECK(r.per_task.at(Task::mcd).metrics.at("recall") == Rational(1, 2));
    CHECK(r.per_task.at(Task::mcd).primary == Rational(2, 3));
    CHECK(r.per_task.at(Task::rce_row).primary == Rational(2, 3));
    CHECK(r.per_task.at(Task::rce_col).primary == Rational(0));
    CHECK(r.per_task.at(Task::rce_col).failed == 1);
    // (1/2 + 1 + 2/3 + 1/2 + 2/3 + 2/3 + 0) / 7
    CHECK(r.overall == Rational(4, 1) / Rational(7));
    auto j = to_json(r);
    CHECK(j["per_task"]["tce"]["exact"]["accuracy"] == "2/3");
    CHECK(to_text(r).find("rce_col") != std::string::npos);
}

TEST_CASE("aggregate: all correct gives 1 and is order independent") {
    std::vector<GoldRecord> golds;
    std::vector<PredictionInput> preds;
    for (int i = 0; i < 20; ++i) {
        golds.push_back(gold(std::to_string(i), i % 2 ? "tqa" : "tfv", i % 2 ? "v" + std::to_string(i) : "refuted"));
        preds.push_back(pred(std::to_string(i), i % 2 ? "V" + std::to_string(i) : "false"));
    }
    auto r = aggregate(preds, golds);
    CHECK(r.overall == Rational(1));
    std::mt19937_64 rng(1);
    std::shuffle(preds.begin(), preds.end(), rng);
    std::shuffle(golds.begin(), golds.end(), rng);
    CHECK(to_json(aggregate(preds, golds)) == to_json(r));
}

TEST_CASE("aggregate: reconciliation errors") {
    std::vector<GoldRecord> golds{gold("1", "tqa", "a")};
    try {
        aggregate({pred("1", "a"), pred("9", "b")}, golds);
        FAIL("expected ReconciliationError");
    } catch (const ReconciliationError& e) {
        CHECK(std::string(e.what()).find("9") != std::string::npos);
    }
    CHECK_THROWS_AS(aggregate({}, golds), ReconciliationError);
    CHECK_THROWS_AS(aggregate({pred("1", "a"), pred("1", "a")}, golds), ReconciliationError);
}

TEST_CASE("token stats mean completion tokens per mode") {
    std::vector<PredictionInput> preds;
    for (std::int64_t t : {100, 200, 300}) preds.push_back({std::to_string(t), "gls", "", false, t});
    preds.push_back({"x", "direct", "", false, 7});
    preds.push_back({"y", "direct", "", false, std::nullopt});
    auto stats = token_stats(preds);
    CHECK(stats.at("gls").mean_completion_tokens == Rational(200));
    CHECK(stats.at("gls").n == 3);
    CHECK(stats.at("direct").n == 1);
}

}
