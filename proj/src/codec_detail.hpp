#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabgls/table.hpp"

namespace tabgls::codec::detail {

/// One cell as written in a row-oriented source, before grid placement.
struct RawCell {
    int row_span = 1;  // 0 = to the last row
    int col_span = 1;
    std::string content;
    bool is_header = false;
    std::size_t offset = 0;
};

/// HTML table-model placement: each row's cells fill the leftmost free
/// slots, row spans are clamped to the last row and ragged rows are padded
/// with empty cells.
Table place_rows(const std::vector<std::vector<RawCell>>& rows, std::optional<std::string> caption,
                 SourceFormat format, std::string_view source);

std::pair<std::size_t, std::size_t> line_and_column(std::string_view source, std::size_t offset);

[[noreturn]] void fail(SourceFormat format, std::string_view source, std::size_t offset,
                       const std::string& reason);

}  // namespace tabgls::codec::detail
