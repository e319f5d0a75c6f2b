#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace tabgls {

enum class SourceFormat { html, markdown, latex, canonical_json };

std::string_view to_string(SourceFormat f);
SourceFormat source_format_from_string(std::string_view s);

/// 1-based grid coordinate.
struct GridIndex {
    int row = 1;
    int col = 1;

    friend bool operator==(const GridIndex&, const GridIndex&) = default;
    friend auto operator<=>(const GridIndex&, const GridIndex&) = default;
};

/// A cell anchored at (anchor_row, anchor_col) covering row_span x col_span
/// grid positions. Coordinates are 1-based.
struct Cell {
    int anchor_row = 1;
    int anchor_col = 1;
    int row_span = 1;
    int col_span = 1;
    std::string content;
    bool is_header = false;

    bool is_spanning() const noexcept { return row_span > 1 || col_span > 1; }
    bool covers(GridIndex idx) const noexcept {
        return idx.row >= anchor_row && idx.row < anchor_row + row_span &&
               idx.col >= anchor_col && idx.col < anchor_col + col_span;
    }

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Row-major matrix of cell ordinals, entry (r, c) stored at
/// ordinals[(r - 1) * n_cols + (c - 1)].
struct CoverageGrid {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<std::size_t> ordinals;

    std::size_t at(GridIndex idx) const {
        return ordinals[static_cast<std::size_t>(idx.row - 1) * n_cols + (idx.col - 1)];
    }
    std::vector<std::vector<std::size_t>> rows() const;
};

/// Tiles n_rows x n_cols with the given cells (in the order given). Throws
/// StructureError naming the first coordinate that is covered twice or not at
/// all, or a cell that leaves the grid.
CoverageGrid compute_coverage(int n_rows, int n_cols, std::span<const Cell> cells);

/// Immutable span-aware table. The constructor sorts cells row-major by
/// anchor and rejects anything that does not tile the grid exactly.
class Table {
public:
    Table(int n_rows, int n_cols, std::vector<Cell> cells,
          std::optional<std::string> caption = std::nullopt,
          SourceFormat source_format = SourceFormat::canonical_json);

    /// Span-free table from rows of strings; the first header_rows rows are
    /// flagged as headers. Every row must have the same length.
    static Table from_rows(const std::vector<std::vector<std::string>>& rows,
                           int header_rows = 0,
                           SourceFormat source_format = SourceFormat::canonical_json);

    std::pair<int, int> dims() const noexcept { return {n_rows_, n_cols_}; }
    int n_rows() const noexcept { return n_rows_; }
    int n_cols() const noexcept { return n_cols_; }

    const std::vector<Cell>& cells() const noexcept { return cells_; }
    const std::optional<std::string>& caption() const noexcept { return caption_; }
    SourceFormat source_format() const noexcept { return source_format_; }

    /// The cell covering idx; merged cells are returned for every position
    /// they cover. Throws RangeError outside the grid.
    const Cell& cell_at(GridIndex idx) const;
    std::size_t ordinal_at(GridIndex idx) const;

    const CoverageGrid& coverage_grid() const noexcept { return coverage_; }

    bool is_span_free() const noexcept;

    /// Copy with every cell content (and the caption, if any) replaced.
    Table with_uniform_content(const std::string& content) const;
    Table with_source_format(SourceFormat f) const;

    /// Equal dims and cells; caption and source format are ignored.
    bool same_grid(const Table& other) const noexcept {
        return n_rows_ == other.n_rows_ && n_cols_ == other.n_cols_ && cells_ == other.cells_;
    }

    friend bool operator==(const Table& a, const Table& b) noexcept {
        return a.same_grid(b) && a.caption_ == b.caption_;
    }

private:
    int n_rows_;
    int n_cols_;
    std::vector<Cell> cells_;
    std::optional<std::string> caption_;
    SourceFormat source_format_;
    CoverageGrid coverage_;
};

inline std::pair<int, int> dims(const Table& t) { return t.dims(); }
inline const Cell& cell_at(const Table& t, GridIndex idx) { return t.cell_at(idx); }

/// Canonical JSON interchange form:
/// {"n_rows", "n_cols", "caption", "cells": [{"row", "col", "row_span",
/// "col_span", "content", "is_header"}]}
nlohmann::ordered_json to_canonical_json(const Table& t);
Table from_canonical_json(const nlohmann::json& j);

}  // namespace tabgls
