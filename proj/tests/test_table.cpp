#include <doctest.h>

#include <random>

#include "support/generators.hpp"
#include "tabgls/errors.hpp"
#include "tabgls/table.hpp"

using namespace tabgls;

namespace {

Table abcd() { return Table::from_rows({{"a", "b"}, {"c", "d"}}); }

// Row 1: one cell spanning all four columns; two span-free body rows.
Table banner_table() {
    std::vector<Cell> cells{{1, 1, 1, 4, "Title", true}};
    for (int r = 2; r <= 3; ++r)
        for (int c = 1; c <= 4; ++c) cells.push_back({r, c, 1, 1, std::to_string(r * 10 + c), false});
    return Table(3, 4, cells);
}

}  // namespace

TEST_SUITE("table") {

TEST_CASE("dims reads back stored dimensions") {
    CHECK(dims(abcd()) == std::pair{2, 2});
    CHECK(dims(banner_table()) == std::pair{3, 4});
    CHECK(dims(Table::from_rows({{"x"}})) == std::pair{1, 1});
}

TEST_CASE("cell_at resolves anchors and merged coverage") {
    CHECK(cell_at(abcd(), {1, 1}).content == "a");
    CHECK(cell_at(abcd(), {2, 2}).content == "d");
    const auto t = banner_table();
    const Cell& spanning = cell_at(t, {1, 3});
    CHECK(spanning.content == "Title");
    CHECK(spanning.anchor_col == 1);
    CHECK(spanning.col_span == 4);
    CHECK(&cell_at(t, {1, 1}) == &cell_at(t, {1, 4}));
}

TEST_CASE("cell_at outside the grid is a range error naming the coordinate") {
    try {
        (void)cell_at(abcd(), {3, 1});
        FAIL("expected RangeError");
    } catch (const RangeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 3") != std::string::npos);
        CHECK(msg.find("2x2") != std::string::npos);
    }
    CHECK_THROWS_AS((void)cell_at(abcd(), {0, 1}), RangeError);
    CHECK_THROWS_AS((void)cell_at(abcd(), {1, 3}), RangeError);
}

TEST_CASE("coverage grid ordinals") {
    using Rows = std::vector<std::vector<std::size_t>>;
    CHECK(abcd().coverage_grid().rows() == Rows{{0, 1}, {2, 3}});
    Table merged(2, 2, {{1, 1, 1, 2, "X"}, {2, 1, 1, 1, "a"}, {2, 2, 1, 1, "b"}});
    CHECK(merged.coverage_grid().rows() == Rows{{0, 0}, {1, 2}});
}

TEST_CASE("overlapping or gapped cells are structural errors") {
    std::vector<Cell> overlap{{1, 1, 1, 2, "X"}, {1, 2, 1, 1, "Y"}, {2, 1, 1, 2, "Z"}};
    try {
        Table t(2, 2, overlap);
        FAIL("expected StructureError");
    } catch (const StructureError& e) {
        CHECK(std::string(e.what()).find("(1, 2)") != std::string::npos);
    }
    std::vector<Cell> gap{{1, 1, 1, 1, "a"}, {1, 2, 1, 1, "b"}, {2, 1, 1, 1, "c"}};
    CHECK_THROWS_WITH_AS(Table(2, 2, gap), doctest::Contains("gap at (2, 2)"), StructureError);
    CHECK_THROWS_AS(Table(1, 1, {{1, 1, 2, 1, "tall"}}), StructureError);
    CHECK_THROWS_AS(Table(0, 1, {}), StructureError);
}

TEST_CASE("cells are stored row-major regardless of input order") {
    Table t(2, 2, {{2, 2, 1, 1, "d"}, {1, 1, 1, 1, "a"}, {2, 1, 1, 1, "c"}, {1, 2, 1, 1, "b"}});
    CHECK(t == abcd());
}

TEST_CASE("property: cell_at agrees with coverage grid and a linear-scan oracle") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 300; ++iter) {
        const auto t = testsupport::random_table(rng, {6, 6, true});
        int max_row = 0;
        int max_col = 0;
        for (const auto& c : t.cells()) {
            max_row = std::max(max_row, c.anchor_row + c.row_span - 1);
            max_col = std::max(max_col, c.anchor_col + c.col_span - 1);
        }
        REQUIRE(dims(t) == std::pair{max_row, max_col});
        for (int r = 1; r <= t.n_rows(); ++r) {
            for (int c = 1; c <= t.n_cols(); ++c) {
                int covering = 0;
                const Cell* found = nullptr;
                for (const auto& cell : t.cells()) {
                    if (cell.covers({r, c})) {
                        ++covering;
                        found = &cell;
                    }
                }
                REQUIRE(covering == 1);
                REQUIRE(&t.cell_at({r, c}) == found);
                REQUIRE(&t.cells()[t.coverage_grid().at({r, c})] == found);
            }
        }
    }
}

TEST_CASE("canonical json schema round trip") {
    Table t(2, 2, {{1, 1, 1, 2, "X", true}, {2, 1, 1, 1, "a"}, {2, 2, 1, 1, "b"}}, std::string("cap"));
    const auto j = to_canonical_json(t);
    CHECK(j.dump() ==
          R"({"n_rows":2,"n_cols":2,"caption":"cap","cells":[{"row":1,"col":1,"row_span":1,"col_span":2,"content":"X","is_header":true},{"row":2,"col":1,"row_span":1,"col_span":1,"content":"a","is_header":false},{"row":2,"col":2,"row_span":1,"col_span":1,"content":"b","is_header":false}]})");
    CHECK(from_canonical_json(nlohmann::json::parse(j.dump())) == t);
    CHECK_THROWS_AS(from_canonical_json(nlohmann::json::parse(R"({"n_rows":1})")), DataError);
}

}  // TEST_SUITE
