#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <map>

#include <fmt/format.h>

#include "codec_detail.hpp"
#include "tabgls/codec.hpp"
#include "tabgls/text.hpp"

namespace tabgls::codec {

namespace {

using detail::RawCell;

constexpr int kMaxColSpan = 1000;
constexpr int kMaxRowSpan = 65534;

struct NamedEntity {
    std::string_view name;
    std::uint32_t codepoint;
};

// nbsp decodes to a plain space so that it collapses like other whitespace.
constexpr std::array<NamedEntity, 30> kEntities{{
    {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},     {"apos", '\''},
    {"nbsp", ' '},     {"ndash", 0x2013}, {"mdash", 0x2014}, {"hellip", 0x2026}, {"copy", 0xA9},
    {"reg", 0xAE},     {"deg", 0xB0},     {"times", 0xD7},   {"minus", 0x2212}, {"euro", 0x20AC},
    {"pound", 0xA3},   {"yen", 0xA5},     {"cent", 0xA2},    {"laquo", 0xAB},   {"raquo", 0xBB},
    {"middot", 0xB7},  {"plusmn", 0xB1},  {"frac12", 0xBD},  {"sup2", 0xB2},    {"sup3", 0xB3},
    {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"bull", 0x2022},
}};

bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == ':'; }

struct Tag {
    std::string name;  // lowercase
    bool closing = false;
    std::map<std::string, std::string> attrs;
    std::size_t begin = 0;
    std::size_t end = 0;  // one past '>'
};

// Parses the tag starting at source[pos] == '<'. Returns nullopt when the
// '<' does not start a tag (it is then treated as text).
std::optional<Tag> read_tag(const std::string& s, std::size_t pos) {
    Tag tag;
    tag.begin = pos;
    std::size_t i = pos + 1;
    if (i < s.size() && s[i] == '/') {
        tag.closing = true;
        ++i;
    }
    if (i >= s.size() || !std::isalpha(static_cast<unsigned char>(s[i]))) return std::nullopt;
    while (i < s.size() && is_name_char(s[i])) tag.name.push_back(static_cast<char>(std::tolower(s[i++])));
    while (i < s.size()) {
        while (i < s.size() && (text::is_space(s[i]) || s[i] == '/')) ++i;
        if (i >= s.size()) break;
        if (s[i] == '>') {
            tag.end = i + 1;
            return tag;
        }
        std::string name;
        while (i < s.size() && !text::is_space(s[i]) && s[i] != '=' && s[i] != '>' && s[i] != '/') {
            name.push_back(static_cast<char>(std::tolower(s[i++])));
        }
        while (i < s.size() && text::is_space(s[i])) ++i;
        std::string value;
        if (i < s.size() && s[i] == '=') {
            ++i;
            while (i < s.size() && text::is_space(s[i])) ++i;
            if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
                const char q = s[i++];
                auto close = s.find(q, i);
                if (close == std::string::npos) return std::nullopt;
                value = s.substr(i, close - i);
                i = close + 1;
            } else {
                while (i < s.size() && !text::is_space(s[i]) && s[i] != '>') value.push_back(s[i++]);
            }
        }
        if (!name.empty()) tag.attrs.emplace(std::move(name), decode_html_entities(value));
    }
    return std::nullopt;
}

int span_attr(const Tag& tag, const char* key, int fallback_for_zero, int cap) {
    auto it = tag.attrs.find(key);
    if (it == tag.attrs.end()) return 1;
    auto v = text::trim(it->second);
    int n = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || ptr == v.data() || n < 0) return 1;
    if (n == 0) return fallback_for_zero;
    return std::min(n, cap);
}

bool is_block_tag(const std::string& name) {
    static constexpr std::array<std::string_view, 8> block{"br", "p", "div", "li", "ul", "ol", "hr", "tr"};
    return std::find(block.begin(), block.end(), name) != block.end();
}

}  // namespace

std::string decode_html_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back('&');
            continue;
        }
        std::string_view name = s.substr(i + 1, semi - i - 1);
        bool decoded = false;
        if (!name.empty() && name[0] == '#') {
            std::uint32_t cp = 0;
            const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
            std::string_view digits = name.substr(hex ? 2 : 1);
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
            if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) {
                text::append_utf8(out, cp == 0xA0 ? ' ' : cp);
                decoded = true;
            }
        } else {
            for (const auto& e : kEntities) {
                if (e.name == name) {
                    text::append_utf8(out, e.codepoint);
                    decoded = true;
                    break;
                }
            }
        }
        if (decoded) {
            i = semi;
        } else {
            out.push_back('&');
        }
    }
    return out;
}

std::string escape_html(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

Table parse_html(const std::string& s) {
    constexpr auto F = SourceFormat::html;

    std::size_t start = std::string::npos;
    for (std::size_t p = text::ifind(s, "<table"); p != std::string::npos; p = text::ifind(s, "<table", p + 1)) {
        const std::size_t after = p + 6;
        if (after >= s.size() || text::is_space(s[after]) || s[after] == '>' || s[after] == '/') {
            start = p;
            break;
        }
    }
    if (start == std::string::npos) detail::fail(F, s, 0, "no <table> element found");
    auto open = read_tag(s, start);
    if (!open) detail::fail(F, s, start, "malformed <table> tag");

    std::vector<std::vector<RawCell>> rows;
    std::optional<std::string> caption;
    std::string caption_buf;
    bool in_caption = false;
    bool in_head = false;
    bool row_open = false;
    std::optional<RawCell> cell;
    std::string cell_buf;

    auto close_cell = [&] {
        if (!cell) return;
        cell->content = text::collapse_whitespace(decode_html_entities(cell_buf));
        rows.back().push_back(std::move(*cell));
        cell.reset();
        cell_buf.clear();
    };
    auto close_row = [&] {
        close_cell();
        row_open = false;
    };
    auto open_row = [&] {
        close_row();
        rows.emplace_back();
        row_open = true;
    };

    std::size_t i = open->end;
    bool closed = false;
    while (i < s.size()) {
        if (s.compare(i, 4, "<!--") == 0) {
            auto end = s.find("-->", i + 4);
            if (end == std::string::npos) detail::fail(F, s, i, "unterminated comment");
            i = end + 3;
            continue;
        }
        if (s[i] != '<') {
            auto next = s.find('<', i);
            if (next == std::string::npos) next = s.size();
            if (cell) {
                cell_buf.append(s, i, next - i);
            } else if (in_caption) {
                caption_buf.append(s, i, next - i);
            } else if (!text::trim(std::string_view(s).substr(i, next - i)).empty()) {
                detail::fail(F, s, i, "text outside of any cell");
            }
            i = next;
            continue;
        }
        auto tag = read_tag(s, i);
        if (!tag) {
            if (cell) {
                cell_buf.push_back('<');
            } else if (in_caption) {
                caption_buf.push_back('<');
            } else {
                detail::fail(F, s, i, "malformed tag");
            }
            ++i;
            continue;
        }
        i = tag->end;
        const std::string& name = tag->name;
        if (name == "script" || name == "style") {
            if (!tag->closing) {
                auto end = text::ifind(s, "</" + name, i);
                if (end == std::string::npos) detail::fail(F, s, tag->begin, "unterminated <" + name + ">");
                i = s.find('>', end);
                i = i == std::string::npos ? s.size() : i + 1;
            }
            continue;
        }
        if (name == "table") {
            if (!tag->closing) detail::fail(F, s, tag->begin, "nested tables are not supported");
            close_row();
            closed = true;
            break;
        }
        if (name == "caption") {
            in_caption = !tag->closing;
            if (tag->closing) caption = text::collapse_whitespace(decode_html_entities(caption_buf));
            continue;
        }
        if (name == "thead" || name == "tbody" || name == "tfoot") {
            close_row();
            in_head = !tag->closing && name == "thead";
            continue;
        }
        if (name == "tr") {
            if (tag->closing) {
                close_row();
            } else {
                open_row();
            }
            continue;
        }
        if (name == "td" || name == "th") {
            close_cell();
            if (tag->closing) continue;
            if (!row_open) open_row();
            RawCell raw;
            raw.col_span = span_attr(*tag, "colspan", 1, kMaxColSpan);
            raw.row_span = span_attr(*tag, "rowspan", 0, kMaxRowSpan);
            raw.is_header = name == "th" || in_head;
            raw.offset = tag->begin;
            cell = std::move(raw);
            continue;
        }
        // Any other markup inside a cell contributes only its text.
        if (cell && is_block_tag(name)) cell_buf.push_back(' ');
        if (in_caption && is_block_tag(name)) caption_buf.push_back(' ');
    }
    if (!closed) detail::fail(F, s, start, "unterminated <table> element");
    if (caption && caption->empty()) caption.reset();
    return detail::place_rows(rows, std::move(caption), F, s);
}

std::string serialize_html(const Table& t) {
    std::string out = "<table>\n";
    if (t.caption()) out += "<caption>" + escape_html(*t.caption()) + "</caption>\n";
    auto it = t.cells().begin();
    for (int r = 1; r <= t.n_rows(); ++r) {
        out += "<tr>";
        for (; it != t.cells().end() && it->anchor_row == r; ++it) {
            const char* tag = it->is_header ? "th" : "td";
            out += fmt::format("<{}", tag);
            if (it->row_span > 1) out += fmt::format(" rowspan=\"{}\"", it->row_span);
            if (it->col_span > 1) out += fmt::format(" colspan=\"{}\"", it->col_span);
            out += fmt::format(">{}</{}>", escape_html(it->content), tag);
        }
        out += "</tr>\n";
    }
    out += "</table>";
    return out;
}

}  // namespace tabgls::codec
