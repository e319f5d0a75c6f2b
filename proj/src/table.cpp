#include "tabgls/table.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "tabgls/errors.hpp"

namespace tabgls {

namespace {

constexpr std::size_t kUnfilled = std::numeric_limits<std::size_t>::max();

}  // namespace

std::string_view to_string(SourceFormat f) {
    switch (f) {
        case SourceFormat::html: return "html";
        case SourceFormat::markdown: return "markdown";
        case SourceFormat::latex: return "latex";
        case SourceFormat::canonical_json: return "canonical-json";
    }
    return "unknown";
}

SourceFormat source_format_from_string(std::string_view s) {
    if (s == "html") return SourceFormat::html;
    if (s == "markdown" || s == "md") return SourceFormat::markdown;
    if (s == "latex" || s == "tex") return SourceFormat::latex;
    if (s == "canonical-json" || s == "json") return SourceFormat::canonical_json;
    throw PreconditionError(fmt::format("unknown table format \"{}\"", s));
}

std::vector<std::vector<std::size_t>> CoverageGrid::rows() const {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(n_rows));
    for (int r = 0; r < n_rows; ++r) {
        auto first = ordinals.begin() + static_cast<std::ptrdiff_t>(r) * n_cols;
        out[static_cast<std::size_t>(r)].assign(first, first + n_cols);
    }
    return out;
}

CoverageGrid compute_coverage(int n_rows, int n_cols, std::span<const Cell> cells) {
    if (n_rows < 1 || n_cols < 1) {
        throw StructureError(fmt::format("table dims must be positive, got {}x{}", n_rows, n_cols));
    }
    CoverageGrid grid{n_rows, n_cols,
                      std::vector<std::size_t>(static_cast<std::size_t>(n_rows) * n_cols, kUnfilled)};
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Cell& c = cells[i];
        if (c.row_span < 1 || c.col_span < 1) {
            throw StructureError(fmt::format("cell at ({}, {}) has non-positive span {}x{}",
                                             c.anchor_row, c.anchor_col, c.row_span, c.col_span));
        }
        if (c.anchor_row < 1 || c.anchor_col < 1 || c.anchor_row + c.row_span - 1 > n_rows ||
            c.anchor_col + c.col_span - 1 > n_cols) {
            throw StructureError(fmt::format(
                "cell at ({}, {}) with span {}x{} leaves the {}x{} grid", c.anchor_row,
                c.anchor_col, c.row_span, c.col_span, n_rows, n_cols));
        }
        for (int r = c.anchor_row; r < c.anchor_row + c.row_span; ++r) {
            for (int col = c.anchor_col; col < c.anchor_col + c.col_span; ++col) {
                auto& slot = grid.ordinals[static_cast<std::size_t>(r - 1) * n_cols + (col - 1)];
                if (slot != kUnfilled) {
                    throw StructureError(
                        fmt::format("overlapping cells at ({}, {}): cells {} and {}", r, col, slot, i));
                }
                slot = i;
            }
        }
    }
    for (int r = 1; r <= n_rows; ++r) {
        for (int col = 1; col <= n_cols; ++col) {
            if (grid.at({r, col}) == kUnfilled) {
                throw StructureError(fmt::format("gap at ({}, {}): no cell covers it", r, col));
            }
        }
    }
    return grid;
}

Table::Table(int n_rows, int n_cols, std::vector<Cell> cells, std::optional<std::string> caption,
             SourceFormat source_format)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      cells_(std::move(cells)),
      caption_(std::move(caption)),
      source_format_(source_format) {
    std::stable_sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) {
        return std::pair(a.anchor_row, a.anchor_col) < std::pair(b.anchor_row, b.anchor_col);
    });
    coverage_ = compute_coverage(n_rows_, n_cols_, cells_);
}

Table Table::from_rows(const std::vector<std::vector<std::string>>& rows, int header_rows,
                       SourceFormat source_format) {
    if (rows.empty() || rows.front().empty()) {
        throw PreconditionError("from_rows needs at least one non-empty row");
    }
    const auto width = rows.front().size();
    std::vector<Cell> cells;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != width) {
            throw PreconditionError(
                fmt::format("row {} has {} cells, expected {}", r + 1, rows[r].size(), width));
        }
        for (std::size_t c = 0; c < width; ++c) {
            cells.push_back(Cell{static_cast<int>(r + 1), static_cast<int>(c + 1), 1, 1, rows[r][c],
                                 static_cast<int>(r) < header_rows});
        }
    }
    return Table(static_cast<int>(rows.size()), static_cast<int>(width), std::move(cells),
                 std::nullopt, source_format);
}

std::size_t Table::ordinal_at(GridIndex idx) const {
    if (idx.row < 1 || idx.row > n_rows_ || idx.col < 1 || idx.col > n_cols_) {
        throw RangeError(fmt::format("index (row {}, col {}) outside {}x{} table", idx.row, idx.col,
                                     n_rows_, n_cols_));
    }
    return coverage_.at(idx);
}

const Cell& Table::cell_at(GridIndex idx) const { return cells_[ordinal_at(idx)]; }

bool Table::is_span_free() const noexcept {
    return std::none_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.is_spanning(); });
}

Table Table::with_uniform_content(const std::string& content) const {
    Table copy = *this;
    for (auto& c : copy.cells_) c.content = content;
    if (copy.caption_) copy.caption_ = content;
    return copy;
}

Table Table::with_source_format(SourceFormat f) const {
    Table copy = *this;
    copy.source_format_ = f;
    return copy;
}

nlohmann::ordered_json to_canonical_json(const Table& t) {
    nlohmann::ordered_json j;
    j["n_rows"] = t.n_rows();
    j["n_cols"] = t.n_cols();
    j["caption"] = t.caption() ? nlohmann::ordered_json(*t.caption()) : nlohmann::ordered_json();
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : t.cells()) {
        nlohmann::ordered_json cj;
        cj["row"] = c.anchor_row;
        cj["col"] = c.anchor_col;
        cj["row_span"] = c.row_span;
        cj["col_span"] = c.col_span;
        cj["content"] = c.content;
        cj["is_header"] = c.is_header;
        cells.push_back(std::move(cj));
    }
    j["cells"] = std::move(cells);
    return j;
}

namespace {

int require_int(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) {
        throw DataError(fmt::format("canonical table: \"{}\" must be an integer", key));
    }
    return it->get<int>();
}

}  // namespace

Table from_canonical_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("canonical table must be a JSON object");
    const int n_rows = require_int(j, "n_rows");
    const int n_cols = require_int(j, "n_cols");
    std::optional<std::string> caption;
    if (auto it = j.find("caption"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw DataError("canonical table: \"caption\" must be a string or null");
        caption = it->get<std::string>();
    }
    auto cells_it = j.find("cells");
    if (cells_it == j.end() || !cells_it->is_array()) {
        throw DataError("canonical table: \"cells\" must be an array");
    }
    std::vector<Cell> cells;
    cells.reserve(cells_it->size());
    for (const auto& cj : *cells_it) {
        if (!cj.is_object()) throw DataError("canonical table: cell entries must be objects");
        Cell c;
        c.anchor_row = require_int(cj, "row");
        c.anchor_col = require_int(cj, "col");
        c.row_span = cj.contains("row_span") ? require_int(cj, "row_span") : 1;
        c.col_span = cj.contains("col_span") ? require_int(cj, "col_span") : 1;
        auto content = cj.find("content");
        if (content == cj.end() || !content->is_string()) {
            throw DataError("canonical table: cell \"content\" must be a string");
        }
        c.content = content->get<std::string>();
        if (auto h = cj.find("is_header"); h != cj.end()) {
            if (!h->is_boolean()) throw DataError("canonical table: \"is_header\" must be a boolean");
            c.is_header = h->get<bool>();
        }
        cells.push_back(std::move(c));
    }
    return Table(n_rows, n_cols, std::move(cells), std::move(caption), SourceFormat::canonical_json);
}

}  // namespace tabgls
