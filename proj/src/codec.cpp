#include "tabgls/codec.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "codec_detail.hpp"
#include "tabgls/errors.hpp"
#include "tabgls/text.hpp"

namespace tabgls {

PlaceholderToken::PlaceholderToken(std::string token) : token_(std::move(token)) {
    if (token_.empty()) throw PreconditionError("placeholder token must not be empty");
    if (token_.find_first_of("|<>&\\") != std::string::npos) {
        throw PreconditionError(
            fmt::format("placeholder token \"{}\" contains a structural character (| < > & \\)", token_));
    }
    if (text::collapse_whitespace(token_) != token_) {
        throw PreconditionError(
            fmt::format("placeholder token \"{}\" has leading, trailing or repeated whitespace", token_));
    }
}

Table parse(const TableText& input) {
    if (text::trim(input.text).empty()) {
        throw ParseError(std::string(to_string(input.format)), 1, 0, "empty input");
    }
    switch (input.format) {
        case SourceFormat::html: return codec::parse_html(input.text);
        case SourceFormat::markdown: return codec::parse_markdown(input.text);
        case SourceFormat::latex: return codec::parse_latex(input.text);
        case SourceFormat::canonical_json: return codec::parse_canonical_json(input.text);
    }
    throw PreconditionError("unknown table format");
}

TableText serialize(const Table& table, SourceFormat format) {
    switch (format) {
        case SourceFormat::html: return {format, codec::serialize_html(table)};
        case SourceFormat::markdown: return {format, codec::serialize_markdown(table)};
        case SourceFormat::latex: return {format, codec::serialize_latex(table)};
        case SourceFormat::canonical_json: return {format, codec::serialize_canonical_json(table)};
    }
    throw PreconditionError("unknown table format");
}

TableText anonymize(const Table& table, SourceFormat format, const PlaceholderToken& placeholder) {
    return serialize(table.with_uniform_content(placeholder.token()), format);
}

TableText anonymize(const TableText& input, const PlaceholderToken& placeholder) {
    return anonymize(parse(input), input.format, placeholder);
}

namespace codec {

Table parse_canonical_json(const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(source);
    } catch (const nlohmann::json::parse_error& e) {
        detail::fail(SourceFormat::canonical_json, source, e.byte > 0 ? e.byte - 1 : 0, e.what());
    }
    try {
        return from_canonical_json(j);
    } catch (const DataError& e) {
        detail::fail(SourceFormat::canonical_json, source, 0, e.what());
    } catch (const StructureError& e) {
        detail::fail(SourceFormat::canonical_json, source, 0, e.what());
    }
}

std::string serialize_canonical_json(const Table& t) {
    return to_canonical_json(t).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace codec

namespace codec::detail {

std::pair<std::size_t, std::size_t> line_and_column(std::string_view source, std::size_t offset) {
    offset = std::min(offset, source.size());
    std::size_t line = 1;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < offset; ++i) {
        if (source[i] == '\n') {
            ++line;
            line_start = i + 1;
        }
    }
    return {line, offset - line_start};
}

void fail(SourceFormat format, std::string_view source, std::size_t offset, const std::string& reason) {
    auto [line, col] = line_and_column(source, offset);
    (void)col;
    throw ParseError(std::string(to_string(format)), line, offset, reason);
}

Table place_rows(const std::vector<std::vector<RawCell>>& rows, std::optional<std::string> caption,
                 SourceFormat format, std::string_view source) {
    const int n_rows = static_cast<int>(rows.size());
    if (n_rows == 0) fail(format, source, 0, "table has no rows");

    std::vector<std::vector<bool>> occupied(rows.size());
    auto is_occupied = [&](int r, int c) {
        const auto& row = occupied[static_cast<std::size_t>(r)];
        return c < static_cast<int>(row.size()) && row[static_cast<std::size_t>(c)];
    };
    auto occupy = [&](int r, int c) {
        auto& row = occupied[static_cast<std::size_t>(r)];
        if (c >= static_cast<int>(row.size())) row.resize(static_cast<std::size_t>(c) + 1, false);
        row[static_cast<std::size_t>(c)] = true;
    };

    std::vector<Cell> cells;
    int n_cols = 0;
    for (int r = 0; r < n_rows; ++r) {
        int c = 0;
        for (const auto& raw : rows[static_cast<std::size_t>(r)]) {
            while (is_occupied(r, c)) ++c;
            int rs = raw.row_span == 0 ? n_rows - r : std::min(raw.row_span, n_rows - r);
            int cs = std::max(raw.col_span, 1);
            for (int rr = r; rr < r + rs; ++rr) {
                for (int cc = c; cc < c + cs; ++cc) {
                    if (is_occupied(rr, cc)) {
                        fail(format, source, raw.offset,
                             fmt::format("cell at row {}, column {} overlaps a spanning cell at ({}, {})",
                                         r + 1, c + 1, rr + 1, cc + 1));
                    }
                    occupy(rr, cc);
                }
            }
            cells.push_back(Cell{r + 1, c + 1, rs, cs, raw.content, raw.is_header});
            c += cs;
            n_cols = std::max(n_cols, c);
        }
    }
    for (const auto& row : occupied) n_cols = std::max(n_cols, static_cast<int>(row.size()));
    if (n_cols == 0) fail(format, source, 0, "table has no cells");

    for (int r = 0; r < n_rows; ++r) {
        for (int c = 0; c < n_cols; ++c) {
            if (!is_occupied(r, c)) cells.push_back(Cell{r + 1, c + 1, 1, 1, "", false});
        }
    }
    return Table(n_rows, n_cols, std::move(cells), std::move(caption), format);
}

}  // namespace codec::detail

}  // namespace tabgls
