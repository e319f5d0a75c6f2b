#include <fmt/format.h>

#include "codec_detail.hpp"
#include "tabgls/codec.hpp"
#include "tabgls/errors.hpp"
#include "tabgls/text.hpp"

namespace tabgls::codec {

namespace {

constexpr auto F = SourceFormat::markdown;

bool is_ascii_punct(char c) {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

// Splits one table line on unescaped pipes, dropping the optional outer
// pipes. Backslash escapes of ASCII punctuation are resolved.
std::vector<std::string> split_row(std::string_view line) {
    line = text::trim(line);
    std::vector<std::string> cells;
    std::string cur;
    bool last_was_pipe = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        last_was_pipe = false;
        if (c == '\\' && i + 1 < line.size() && is_ascii_punct(line[i + 1])) {
            cur.push_back(line[++i]);
            continue;
        }
        if (c == '|') {
            if (i != 0) cells.push_back(std::move(cur));
            cur.clear();
            last_was_pipe = true;
            continue;
        }
        cur.push_back(c);
    }
    // A trailing pipe closes the last cell; otherwise the remainder is a cell.
    if (!last_was_pipe) cells.push_back(std::move(cur));
    for (auto& c : cells) c = text::collapse_whitespace(c);
    return cells;
}

bool is_delimiter_cell(std::string_view cell) {
    cell = text::trim(cell);
    if (!cell.empty() && cell.front() == ':') cell.remove_prefix(1);
    if (!cell.empty() && cell.back() == ':') cell.remove_suffix(1);
    if (cell.empty()) return false;
    return cell.find_first_not_of('-') == std::string_view::npos;
}

std::string escape_cell(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '\\' || c == '|') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

Table parse_markdown(const std::string& s) {
    auto lines = text::split_lines(s);
    std::vector<std::size_t> line_offsets;
    {
        std::size_t off = 0;
        for (const auto& l : lines) {
            line_offsets.push_back(off);
            off += l.size() + 1;
        }
    }
    std::size_t first = 0;
    while (first < lines.size() && text::trim(lines[first]).empty()) ++first;
    if (first >= lines.size()) detail::fail(F, s, 0, "empty input");
    auto fail_at = [&](std::size_t line_idx, const std::string& reason) {
        detail::fail(F, s, line_offsets[line_idx], reason);
    };

    if (lines[first].find('|') == std::string::npos) fail_at(first, "header line has no '|' separators");
    const auto header = split_row(lines[first]);
    if (header.empty()) fail_at(first, "header row has no cells");
    if (first + 1 >= lines.size() || text::trim(lines[first + 1]).empty()) {
        fail_at(first, "missing delimiter row after the header");
    }
    const auto delim = split_row(lines[first + 1]);
    for (const auto& d : delim) {
        if (!is_delimiter_cell(d)) fail_at(first + 1, fmt::format("invalid delimiter cell \"{}\"", d));
    }
    if (delim.size() != header.size()) {
        fail_at(first + 1, fmt::format("delimiter row has {} cells, header has {}", delim.size(), header.size()));
    }

    std::vector<std::vector<std::string>> rows{header};
    for (std::size_t i = first + 2; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) break;
        if (lines[i].find('|') == std::string::npos) fail_at(i, "table row has no '|' separators");
        auto row = split_row(lines[i]);
        if (row.size() != header.size()) {
            fail_at(i, fmt::format("ragged row: {} cells, header has {}", row.size(), header.size()));
        }
        rows.push_back(std::move(row));
    }
    return Table::from_rows(rows, 1, F);
}

std::string serialize_markdown(const Table& t) {
    for (const auto& c : t.cells()) {
        if (c.is_spanning()) {
            throw CapabilityError(fmt::format(
                "markdown cannot express spans: cell at row {}, column {} spans {}x{}", c.anchor_row,
                c.anchor_col, c.row_span, c.col_span));
        }
    }
    std::string out;
    auto it = t.cells().begin();
    for (int r = 1; r <= t.n_rows(); ++r) {
        if (r > 1) out.push_back('\n');
        out += "|";
        for (int c = 1; c <= t.n_cols(); ++c, ++it) out += " " + escape_cell(it->content) + " |";
        if (r == 1) {
            out += "\n|";
            for (int c = 1; c <= t.n_cols(); ++c) out += "---|";
        }
    }
    return out;
}

}  // namespace tabgls::codec
