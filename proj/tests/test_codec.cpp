#include <doctest.h>

#include <random>

#include "support/generators.hpp"
#include "tabgls/codec.hpp"
#include "tabgls/errors.hpp"

using namespace tabgls;

namespace {

TableText md(std::string s) { return {SourceFormat::markdown, std::move(s)}; }
TableText html(std::string s) { return {SourceFormat::html, std::move(s)}; }
TableText tex(std::string s) { return {SourceFormat::latex, std::move(s)}; }

std::vector<std::vector<std::string>> contents(const Table& t) {
    std::vector<std::vector<std::string>> out(static_cast<std::size_t>(t.n_rows()));
    for (int r = 1; r <= t.n_rows(); ++r)
        for (int c = 1; c <= t.n_cols(); ++c) out[r - 1].push_back(t.cell_at({r, c}).content);
    return out;
}

using Grid = std::vector<std::vector<std::string>>;

}  // namespace

TEST_SUITE("codec") {

TEST_CASE("markdown: header row, alignment markers, escapes") {
    const auto t = parse(md("| A | B |\n|---|---|\n| 1 | 2 |"));
    CHECK(dims(t) == std::pair{2, 2});
    CHECK(t.cell_at({1, 1}).is_header);
    CHECK(t.cell_at({1, 2}).is_header);
    CHECK_FALSE(t.cell_at({2, 1}).is_header);
    CHECK(contents(t) == Grid{{"A", "B"}, {"1", "2"}});

    const auto aligned = parse(md("\n  A | B  \n:---|---:\n  x   y | a\\|b \n\ntrailing prose"));
    CHECK(contents(aligned) == Grid{{"A", "B"}, {"x y", "a|b"}});
    CHECK(serialize(aligned, SourceFormat::markdown).text == "| A | B |\n|---|---|\n| x y | a\\|b |");
}

TEST_CASE("markdown: malformed input") {
    CHECK_THROWS_AS(parse(md("| A | B |\n|---|---|\n| 1 |")), ParseError);
    CHECK_THROWS_AS(parse(md("| A | B |\n| 1 | 2 |")), ParseError);
    CHECK_THROWS_AS(parse(md("just text")), ParseError);
    CHECK_THROWS_AS(parse(md("| A |")), ParseError);
    try {
        parse(md("| A | B |\n|---|---|\n| 1 | 2 |\n| 3 |"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.format() == "markdown");
        CHECK(e.line() == 4);
        CHECK(e.reason().find("ragged") != std::string::npos);
    }
}

TEST_CASE("markdown serialization") {
    CHECK(serialize(Table::from_rows({{"x"}}), SourceFormat::markdown).text == "| x |\n|---|");
    Table spanning(2, 1, {{1, 1, 2, 1, "tall"}});
    CHECK_THROWS_WITH_AS(serialize(spanning, SourceFormat::markdown),
                         doctest::Contains("row 1, column 1"), CapabilityError);
}

TEST_CASE("html: colspan fragment") {
    // Hand-placed with the HTML table model: X occupies (1,1)-(1,2); a, b fill row 2.
    const auto t = parse(html("<table><tr><td colspan=2>X</td></tr><tr><td>a</td><td>b</td></tr></table>"));
    CHECK(dims(t) == std::pair{2, 2});
    CHECK(t.cells().size() == 3);
    CHECK(t.cells()[0] == Cell{1, 1, 1, 2, "X", false});
    CHECK(t.cell_at({1, 2}).content == "X");
    CHECK(contents(t) == Grid{{"X", "X"}, {"a", "b"}});
}

TEST_CASE("html: rowspan placement skips occupied slots") {
    // Slot (2,1) is taken by the rowspan, so "c" lands in column 2.
    const auto t = parse(html(R"(<p>before</p><TABLE border=1>
      <caption> Scores &amp; ranks </caption>
      <thead><tr><td>Name</td><th>Score</th></tr></thead>
      <tbody>
        <tr><td rowspan="2">a<br>b</td><td>1</td></tr>
        <tr><td>c &lt; d &#65;&#x42;</td></tr>
      </tbody>
    </TABLE>)"));
    CHECK(dims(t) == std::pair{3, 2});
    CHECK(t.caption() == std::optional<std::string>("Scores & ranks"));
    CHECK(t.cell_at({1, 1}).is_header);
    CHECK(t.cell_at({1, 2}).is_header);
    CHECK(t.cell_at({2, 1}).row_span == 2);
    CHECK(contents(t) == Grid{{"Name", "Score"}, {"a b", "1"}, {"a b", "c < d AB"}});
}

TEST_CASE("html: implicit closes, padding and rowspan=0") {
    const auto t = parse(html("<table><tr><td rowspan=0>L<td>1<tr><td>2<td>extra</table>"));
    CHECK(dims(t) == std::pair{2, 3});
    CHECK(t.cell_at({2, 1}).content == "L");
    CHECK(contents(t) == Grid{{"L", "1", ""}, {"L", "2", "extra"}});
}

TEST_CASE("html: malformed input") {
    CHECK_THROWS_AS(parse(html("<div>no table</div>")), ParseError);
    CHECK_THROWS_AS(parse(html("<table><tr><td>a</td></tr>")), ParseError);
    CHECK_THROWS_AS(parse(html("<table><tr><td><table><tr><td>x</td></tr></table></td></tr></table>")), ParseError);
    CHECK_THROWS_AS(parse(html("<table></table>")), ParseError);
    // The colspan in row 2 collides with the rowspan from row 1.
    CHECK_THROWS_AS(parse(html("<table><tr><td>a</td><td rowspan=2>b</td></tr><tr><td colspan=2>c</td></tr></table>")),
                    ParseError);
}

TEST_CASE("latex: plain tabular") {
    const auto t = parse(tex("\\begin{tabular}{cc} a & b \\\\ c & d \\end{tabular}"));
    CHECK(dims(t) == std::pair{2, 2});
    CHECK(contents(t) == Grid{{"a", "b"}, {"c", "d"}});
    CHECK_FALSE(t.cell_at({1, 1}).is_header);
}

TEST_CASE("latex: header rule, booktabs, spans and escapes") {
    const auto t = parse(tex(R"(\begin{table}\caption{Results}
\begin{tabular}{|l|*{2}{c}|} % three columns
\toprule
\multirow{2}{*}{Model} & \multicolumn{2}{c}{Score} \\
 & Dev & Test \\
\midrule
A\&B & 50\% & \textbf{61.2} \\
\$x\_1 & $\alpha$ & \textbackslash{}n \\
\bottomrule
\end{tabular}\end{table})"));
    CHECK(dims(t) == std::pair{4, 3});
    CHECK(t.caption() == std::optional<std::string>("Results"));
    CHECK(t.cell_at({1, 1}).row_span == 2);
    CHECK(t.cell_at({1, 2}).col_span == 2);
    CHECK(t.cell_at({2, 2}).is_header);
    CHECK_FALSE(t.cell_at({3, 1}).is_header);
    CHECK(contents(t) == Grid{{"Model", "Score", "Score"},
                              {"Model", "Dev", "Test"},
                              {"A&B", "50%", "61.2"},
                              {"$x_1", "\\alpha", "\\n"}});
}

TEST_CASE("latex: short rows are padded, long rows rejected") {
    const auto t = parse(tex("\\begin{tabular}{ccc} a & b \\\\ c \\\\ \\end{tabular}"));
    CHECK(contents(t) == Grid{{"a", "b", ""}, {"c", "", ""}});
    CHECK_THROWS_AS(parse(tex("\\begin{tabular}{cc} a & b & c \\\\ \\end{tabular}")), ParseError);
}

TEST_CASE("latex: unsupported constructs") {
    CHECK_THROWS_WITH_AS(parse(tex("\\begin{tabular}{cc} \\multirowcell{2}{a} & b \\\\ & c \\end{tabular}")),
                         doctest::Contains("multirowcell"), ParseError);
    CHECK_THROWS_AS(parse(tex("\\begin{tabular}{cc} \\SetCell[r=2]{} a & b \\end{tabular}")), ParseError);
    CHECK_THROWS_AS(parse(tex("no tabular here")), ParseError);
    CHECK_THROWS_AS(parse(tex("\\begin{tabular}{cc} a & b")), ParseError);
    // Slot under a multirow must be left empty.
    CHECK_THROWS_AS(parse(tex("\\begin{tabular}{cc} \\multirow{2}{*}{a} & b \\\\ x & c \\end{tabular}")), ParseError);
}

TEST_CASE("latex serialization of spans re-parses to the same grid") {
    Table t(3, 3, {{1, 1, 2, 2, "big", true}, {1, 3, 1, 1, "h", true}, {2, 3, 1, 1, "r"},
                   {3, 1, 1, 1, "x"}, {3, 2, 1, 1, "y"}, {3, 3, 1, 1, "z"}});
    const auto text = serialize(t, SourceFormat::latex).text;
    CHECK(text ==
          "\\begin{tabular}{ccc}\n"
          "\\multicolumn{2}{c}{\\multirow{2}{*}{big}} & h \\\\\n"
          "\\hline\n"
          "\\multicolumn{2}{c}{} & r \\\\\n"
          "x & y & z \\\\\n"
          "\\end{tabular}");
    CHECK(parse(tex(text)).same_grid(t));
}

TEST_CASE("canonical json parse errors carry the format") {
    try {
        parse({SourceFormat::canonical_json, "{\"n_rows\": 1,"});
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.format() == "canonical-json");
    }
    CHECK_THROWS_AS(parse({SourceFormat::canonical_json,
                           R"({"n_rows":1,"n_cols":2,"caption":null,"cells":[{"row":1,"col":1,"content":"a"}]})"}),
                    ParseError);
}

TEST_CASE("round trip: canonical-json and html with spans, markdown and latex span-free") {
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 500; ++i) {
        const auto t = testsupport::random_table(rng, {8, 8, true, testsupport::HeaderLayout::random});
        for (auto f : {SourceFormat::canonical_json, SourceFormat::html}) {
            const auto back = parse(serialize(t, f));
            REQUIRE_MESSAGE(back == t, serialize(t, f).text);
        }
        const auto spanning_tex = testsupport::random_table(rng, {8, 8, true, testsupport::HeaderLayout::prefix});
        REQUIRE_MESSAGE(parse(serialize(spanning_tex, SourceFormat::latex)).same_grid(spanning_tex),
                        serialize(spanning_tex, SourceFormat::latex).text);

        const auto flat_md = testsupport::random_table(rng, {8, 8, false, testsupport::HeaderLayout::first_row});
        if (flat_md.n_rows() > 1) {
            REQUIRE(parse(serialize(flat_md, SourceFormat::markdown)).same_grid(flat_md));
        }
        const auto flat_tex = testsupport::random_table(rng, {8, 8, false, testsupport::HeaderLayout::prefix});
        REQUIRE(parse(serialize(flat_tex, SourceFormat::latex)).same_grid(flat_tex));
    }
}

TEST_CASE("round trip preserves awkward characters") {
    const auto t = Table::from_rows({{"a|b", "c\\d", "<&>\"", "50% $x_1$ {y} ~ ^"}, {"", "#", "\\alpha", "é ü 中"}}, 1);
    for (auto f : {SourceFormat::canonical_json, SourceFormat::html, SourceFormat::markdown, SourceFormat::latex}) {
        CHECK_MESSAGE(parse(serialize(t, f)).same_grid(t), to_string(f));
    }
}

TEST_CASE("anonymize: markdown fixture") {
    CHECK(anonymize(md("| A | B |\n|---|---|\n| 1 | 2 |")).text ==
          "| [table content] | [table content] |\n|---|---|\n| [table content] | [table content] |");
}

TEST_CASE("anonymize: html keeps span attributes") {
    const auto in = html("<table><tr><th colspan=2>X</th></tr><tr><td>a</td><td>b</td></tr></table>");
    const auto out = anonymize(in);
    CHECK(out.format == SourceFormat::html);
    CHECK(out.text.find("colspan=\"2\"") != std::string::npos);
    const auto re = parse(out);
    const auto orig = parse(in);
    CHECK(re.same_grid(orig.with_uniform_content("[table content]")));
    CHECK(out.text.find(">X<") == std::string::npos);
}

TEST_CASE("anonymize: fixed point and custom placeholder") {
    const auto already = md("| [table content] |\n|---|\n| [table content] |");
    CHECK(anonymize(already).text == serialize(parse(already), SourceFormat::markdown).text);
    CHECK(anonymize(md("| A |\n|---|"), PlaceholderToken("CELL")).text == "| CELL |\n|---|");
}

TEST_CASE("placeholder validation") {
    CHECK(PlaceholderToken().token() == "[table content]");
    CHECK_THROWS_AS(PlaceholderToken("a|b"), PreconditionError);
    CHECK_THROWS_AS(PlaceholderToken("<x>"), PreconditionError);
    CHECK_THROWS_AS(PlaceholderToken("a\\b"), PreconditionError);
    CHECK_THROWS_AS(PlaceholderToken(" padded"), PreconditionError);
    CHECK_THROWS_AS(PlaceholderToken(""), PreconditionError);
}

TEST_CASE("anonymize: structure invariance and idempotence over a mixed corpus") {
    std::mt19937_64 rng(99);
    const SourceFormat formats[] = {SourceFormat::html, SourceFormat::markdown, SourceFormat::latex,
                                    SourceFormat::canonical_json};
    int checked = 0;
    for (int i = 0; i < 160; ++i) {
        const auto f = formats[i % 4];
        const bool spans = f != SourceFormat::markdown;
        const auto layout = f == SourceFormat::markdown ? testsupport::HeaderLayout::first_row
                                                        : testsupport::HeaderLayout::prefix;
        const auto t = testsupport::random_table(rng, {8, 8, spans, layout, 0.0});
        const auto source = serialize(t, f);
        const auto original = parse(source);
        const auto anon = anonymize(source);
        const auto re = parse(anon);
        REQUIRE(dims(re) == dims(original));
        REQUIRE(re.coverage_grid().ordinals == original.coverage_grid().ordinals);
        for (std::size_t k = 0; k < re.cells().size(); ++k) {
            REQUIRE(re.cells()[k].is_header == original.cells()[k].is_header);
            REQUIRE(re.cells()[k].row_span == original.cells()[k].row_span);
            REQUIRE(re.cells()[k].col_span == original.cells()[k].col_span);
            REQUIRE_MESSAGE(re.cells()[k].content == "[table content]", anon.text);
        }
        REQUIRE(anonymize(anon) == anon);
        ++checked;
    }
    CHECK(checked >= 100);
}

}  // TEST_SUITE
