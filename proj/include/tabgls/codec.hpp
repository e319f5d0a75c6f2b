#pragma once

#include <string>

#include "tabgls/table.hpp"

namespace tabgls {

struct TableText {
    SourceFormat format = SourceFormat::markdown;
    std::string text;

    friend bool operator==(const TableText&, const TableText&) = default;
};

/// Replacement string for anonymized cells. Must be non-empty, already in
/// normalized whitespace form, and free of characters that are structural in
/// any supported format (| < > & \).
class PlaceholderToken {
public:
    static constexpr const char* kDefault = "[table content]";

    PlaceholderToken() : token_(kDefault) {}
    explicit PlaceholderToken(std::string token);

    const std::string& token() const noexcept { return token_; }

private:
    std::string token_;
};

/// Parses table text in its declared format. Cell contents come back decoded
/// (entities, LaTeX escapes) and whitespace-normalized. Throws ParseError.
Table parse(const TableText& input);

/// Serializes to the requested format. Markdown cannot express spans and
/// throws CapabilityError for a spanning cell.
TableText serialize(const Table& table, SourceFormat format);

/// Replaces every cell content with the placeholder, keeping all structure.
TableText anonymize(const TableText& input, const PlaceholderToken& placeholder = {});
TableText anonymize(const Table& table, SourceFormat format, const PlaceholderToken& placeholder = {});

namespace codec {

// Per-format entry points; parse()/serialize() dispatch to these.
Table parse_html(const std::string& text);
Table parse_markdown(const std::string& text);
Table parse_latex(const std::string& text);
Table parse_canonical_json(const std::string& text);

std::string serialize_html(const Table& t);
std::string serialize_markdown(const Table& t);
std::string serialize_latex(const Table& t);
std::string serialize_canonical_json(const Table& t);

std::string decode_html_entities(std::string_view s);
std::string escape_html(std::string_view s);
std::string escape_latex(std::string_view s);

}  // namespace codec

}  // namespace tabgls
