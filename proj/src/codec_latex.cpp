#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "codec_detail.hpp"
#include "tabgls/codec.hpp"
#include "tabgls/errors.hpp"
#include "tabgls/text.hpp"

namespace tabgls::codec {

namespace {

constexpr auto F = SourceFormat::latex;

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Reads the control word starting at s[pos] == '\\'. Returns the name
// (letters only, or the single non-letter character) and advances pos.
std::string read_command(std::string_view s, std::size_t& pos) {
    std::size_t i = pos + 1;
    if (i >= s.size()) {
        pos = i;
        return {};
    }
    if (!is_letter(s[i])) {
        pos = i + 1;
        return std::string(1, s[i]);
    }
    std::size_t b = i;
    while (i < s.size() && is_letter(s[i])) ++i;
    pos = i;
    return std::string(s.substr(b, i - b));
}

void skip_space(std::string_view s, std::size_t& pos) {
    while (pos < s.size() && text::is_space(s[pos])) ++pos;
}

// Reads a balanced {...} group at pos (after optional whitespace); returns
// its inner text or nullopt when there is no group.
std::optional<std::string> read_group(std::string_view s, std::size_t& pos, char open = '{', char close = '}') {
    std::size_t i = pos;
    skip_space(s, i);
    if (i >= s.size() || s[i] != open) return std::nullopt;
    int depth = 0;
    const std::size_t b = i + 1;
    for (; i < s.size(); ++i) {
        if (s[i] == '\\') {
            ++i;
            continue;
        }
        if (s[i] == open) ++depth;
        if (s[i] == close && --depth == 0) {
            pos = i + 1;
            return std::string(s.substr(b, i - b));
        }
    }
    return std::nullopt;
}

std::string strip_comments(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            out.push_back(s[i]);
            out.push_back(s[++i]);
            continue;
        }
        if (s[i] == '%') {
            while (i < s.size() && s[i] != '\n') ++i;
            if (i < s.size()) out.push_back('\n');
            continue;
        }
        out.push_back(s[i]);
    }
    return out;
}

int count_columns(std::string_view spec) {
    int n = 0;
    for (std::size_t i = 0; i < spec.size();) {
        const char c = spec[i];
        if (text::is_space(c) || c == '|' || c == ':') {
            ++i;
        } else if (c == '@' || c == '!' || c == '>' || c == '<') {
            ++i;
            if (!read_group(spec, i)) ++i;
        } else if (c == 'p' || c == 'm' || c == 'b') {
            ++i;
            read_group(spec, i);
            ++n;
        } else if (c == '*') {
            ++i;
            auto count = read_group(spec, i);
            auto inner = read_group(spec, i);
            int k = 0;
            if (count) std::from_chars(count->data(), count->data() + count->size(), k);
            if (inner) n += k * count_columns(*inner);
        } else if (c == '{') {
            read_group(spec, i);
        } else {
            ++i;
            ++n;
        }
    }
    return n;
}

constexpr std::array<std::string_view, 13> kStyleCommands{
    "textbf", "textit", "emph",  "underline", "texttt", "textrm", "textsf",
    "textsc", "mathrm", "mathbf", "mbox",     "text",   "makecell"};

constexpr std::array<std::string_view, 6> kUnsupportedSpans{
    "multirowcell", "multirowthead", "multirowbox", "SetCell", "Block", "multicolumncell"};

// Resolves escapes, styling commands and grouping to plain text.
std::string latex_to_text(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size();) {
        const char c = s[i];
        if (c == '\\') {
            std::size_t p = i;
            std::string cmd = read_command(s, p);
            i = p;
            if (cmd.size() == 1 && !is_letter(cmd[0])) {
                switch (cmd[0]) {
                    case '\\': out.push_back(' '); break;
                    case ',': case ';': case ' ': case '!': out.push_back(' '); break;
                    default: out.push_back(cmd[0]);
                }
                continue;
            }
            auto swallow_empty_group = [&] {
                std::size_t q = i;
                if (q + 1 < s.size() && s[q] == '{' && s[q + 1] == '}') i = q + 2;
            };
            if (cmd == "textbackslash") {
                out.push_back('\\');
                swallow_empty_group();
            } else if (cmd == "textasciitilde") {
                out.push_back('~');
                swallow_empty_group();
            } else if (cmd == "textasciicircum") {
                out.push_back('^');
                swallow_empty_group();
            } else if (cmd == "textless") {
                out.push_back('<');
                swallow_empty_group();
            } else if (cmd == "textgreater") {
                out.push_back('>');
                swallow_empty_group();
            } else if (cmd == "textbar") {
                out.push_back('|');
                swallow_empty_group();
            } else if (cmd == "newline" || cmd == "quad" || cmd == "qquad") {
                out.push_back(' ');
            } else if (std::find(kStyleCommands.begin(), kStyleCommands.end(), cmd) != kStyleCommands.end()) {
                std::size_t q = i;
                read_group(s, q, '[', ']');
                if (auto arg = read_group(s, q)) {
                    out += latex_to_text(*arg);
                    i = q;
                }
            } else {
                out.push_back('\\');
                out += cmd;
            }
            continue;
        }
        if (c == '{' || c == '}' || c == '$') {
            ++i;
            continue;
        }
        out.push_back(c == '~' ? ' ' : c);
        ++i;
    }
    return out;
}

struct ParsedCell {
    detail::RawCell raw;
    bool blank = false;  // plain empty cell usable as a covered-slot placeholder
};

ParsedCell parse_cell(std::string_view src, std::string_view cell, std::size_t offset) {
    ParsedCell pc;
    pc.raw.offset = offset;
    std::string_view body = text::trim(cell);
    for (auto bad : kUnsupportedSpans) {
        std::string needle = "\\" + std::string(bad);
        auto at = body.find(needle);
        if (at != std::string_view::npos &&
            (at + needle.size() >= body.size() || !is_letter(body[at + needle.size()]))) {
            detail::fail(F, src, offset, fmt::format("unsupported span command \\{}", bad));
        }
    }
    auto starts_with_cmd = [](std::string_view b, std::string_view name) {
        return b.size() > name.size() && b[0] == '\\' && b.substr(1, name.size()) == name &&
               (b.size() == name.size() + 1 || !is_letter(b[name.size() + 1]));
    };
    auto read_count = [&](std::string_view b, std::size_t& p, const char* what) {
        auto g = read_group(b, p);
        int k = 0;
        auto t = g ? text::trim(*g) : std::string_view{};
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), k);
        if (!g || ec != std::errc() || ptr != t.data() + t.size() || k < 1) {
            detail::fail(F, src, offset, fmt::format("invalid {} count", what));
        }
        return k;
    };
    std::string content(body);
    bool spanned = false;
    if (starts_with_cmd(body, "multicolumn")) {
        std::size_t p = 1 + std::string_view("multicolumn").size();
        pc.raw.col_span = read_count(body, p, "\\multicolumn");
        if (!read_group(body, p)) detail::fail(F, src, offset, "\\multicolumn is missing its column spec");
        auto arg = read_group(body, p);
        if (!arg) detail::fail(F, src, offset, "\\multicolumn is missing its content");
        if (!text::trim(body.substr(p)).empty()) {
            detail::fail(F, src, offset, "unexpected text after \\multicolumn");
        }
        content = *arg;
        spanned = true;
    }
    std::string_view inner = text::trim(content);
    if (starts_with_cmd(inner, "multirow")) {
        std::size_t p = 1 + std::string_view("multirow").size();
        read_group(inner, p, '[', ']');
        pc.raw.row_span = read_count(inner, p, "\\multirow");
        read_group(inner, p, '[', ']');
        if (!read_group(inner, p)) detail::fail(F, src, offset, "\\multirow is missing its width");
        read_group(inner, p, '[', ']');
        auto arg = read_group(inner, p);
        if (!arg) detail::fail(F, src, offset, "\\multirow is missing its content");
        if (!text::trim(inner.substr(p)).empty()) detail::fail(F, src, offset, "unexpected text after \\multirow");
        content = *arg;
        spanned = true;
    }
    pc.raw.content = text::collapse_whitespace(latex_to_text(content));
    pc.blank = !spanned && pc.raw.content.empty();
    if (spanned && pc.raw.row_span == 1 && pc.raw.content.empty()) pc.blank = true;
    return pc;
}

constexpr std::array<std::string_view, 10> kRuleCommands{
    "hline", "toprule", "midrule", "bottomrule", "cline", "cmidrule", "hhline", "specialrule", "addlinespace", "morecmidrules"};

// Strips leading rule commands; true if any was present.
bool strip_rules(std::string_view& seg) {
    bool any = false;
    for (;;) {
        std::size_t p = 0;
        skip_space(seg, p);
        if (p >= seg.size() || seg[p] != '\\') break;
        std::size_t q = p;
        std::string cmd = read_command(seg, q);
        if (std::find(kRuleCommands.begin(), kRuleCommands.end(), cmd) == kRuleCommands.end()) break;
        if (cmd != "hline") {
            // Optional arguments only count on the same line.
            std::size_t r = q;
            while (r < seg.size() && (seg[r] == ' ' || seg[r] == '\t')) ++r;
            if (r < seg.size() && (seg[r] == '[' || seg[r] == '(')) {
                read_group(seg, q, '[', ']');
                read_group(seg, q, '(', ')');
                read_group(seg, q, '[', ']');
            }
        }
        if (cmd == "cline" || cmd == "cmidrule" || cmd == "hhline") read_group(seg, q);
        if (cmd == "specialrule") {
            read_group(seg, q);
            read_group(seg, q);
            read_group(seg, q);
        }
        seg.remove_prefix(q);
        any = true;
    }
    return any;
}

struct Segment {
    std::string_view text;
    std::size_t offset;
};

std::vector<Segment> split_top_level(std::string_view s, std::size_t base, bool rows) {
    std::vector<Segment> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '{') ++depth;
        if (c == '}') --depth;
        if (c == '\\') {
            if (rows && depth == 0 && i + 1 < s.size() && s[i + 1] == '\\') {
                out.push_back({s.substr(start, i - start), base + start});
                std::size_t p = i + 2;
                if (p < s.size() && s[p] == '*') ++p;
                // Optional spacing argument, only on the same line.
                std::size_t q = p;
                while (q < s.size() && (s[q] == ' ' || s[q] == '\t')) ++q;
                if (q < s.size() && s[q] == '[') {
                    auto close = s.find(']', q);
                    if (close != std::string_view::npos) p = close + 1;
                }
                start = p;
                i = p - 1;
                continue;
            }
            if (rows && depth == 0 && s.substr(i, 15) == "\\tabularnewline") {
                out.push_back({s.substr(start, i - start), base + start});
                start = i + 15;
                i = start - 1;
                continue;
            }
            ++i;
            continue;
        }
        if (!rows && depth == 0 && c == '&') {
            out.push_back({s.substr(start, i - start), base + start});
            start = i + 1;
        }
    }
    out.push_back({s.substr(start), base + start});
    return out;
}

}  // namespace

std::string escape_latex(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\textbackslash{}"; break;
            case '~': out += "\\textasciitilde{}"; break;
            case '^': out += "\\textasciicircum{}"; break;
            case '&': case '%': case '$': case '#': case '_': case '{': case '}':
                out.push_back('\\');
                out.push_back(c);
                break;
            default: out.push_back(c);
        }
    }
    return out;
}

Table parse_latex(const std::string& original) {
    const std::string s = strip_comments(original);

    std::size_t begin = std::string::npos;
    std::string env;
    for (std::string_view name : {"tabular*", "tabularx", "tabular"}) {
        auto p = s.find("\\begin{" + std::string(name) + "}");
        if (p != std::string::npos && p < begin) {
            begin = p;
            env = name;
        }
    }
    if (begin == std::string::npos) detail::fail(F, original, 0, "no \\begin{tabular} found");
    std::size_t pos = begin + 8 + env.size();
    if (env != "tabular") read_group(s, pos);  // width
    read_group(s, pos, '[', ']');
    auto spec = read_group(s, pos);
    if (!spec) detail::fail(F, original, pos, "missing column specification");
    const int n_cols = count_columns(*spec);
    if (n_cols < 1) detail::fail(F, original, pos, "column specification declares no columns");
    const std::string end_marker = "\\end{" + env + "}";
    const auto end = s.find(end_marker, pos);
    if (end == std::string::npos) detail::fail(F, original, begin, "missing " + end_marker);

    std::optional<std::string> caption;
    if (auto cp = s.find("\\caption"); cp != std::string::npos) {
        std::size_t q = cp + 8;
        read_group(s, q, '[', ']');
        if (auto g = read_group(s, q)) caption = text::collapse_whitespace(latex_to_text(*g));
    }

    const std::string_view body = std::string_view(s).substr(pos, end - pos);
    auto segments = split_top_level(body, pos, true);

    std::vector<std::vector<ParsedCell>> rows;
    std::vector<bool> rule_before;  // rule_before[i]: a rule precedes row i
    for (std::size_t si = 0; si < segments.size(); ++si) {
        std::string_view seg = segments[si].text;
        const bool had_rule = strip_rules(seg);
        const std::size_t seg_offset = segments[si].offset + (segments[si].text.size() - seg.size());
        const bool last = si + 1 == segments.size();
        if (last && text::trim(seg).empty()) {
            if (had_rule) rule_before.push_back(true);
            break;
        }
        std::vector<ParsedCell> cells;
        for (const auto& cell : split_top_level(seg, seg_offset, false)) {
            cells.push_back(parse_cell(original, cell.text, cell.offset));
        }
        rows.push_back(std::move(cells));
        rule_before.push_back(had_rule);
    }
    const int n_rows = static_cast<int>(rows.size());
    if (n_rows == 0) detail::fail(F, original, pos, "tabular has no rows");

    int header_rows = 0;
    for (int r = 1; r < n_rows; ++r) {
        if (rule_before[static_cast<std::size_t>(r)]) {
            header_rows = r;
            break;
        }
    }

    // Covered slots: owner[r][c] = ordinal of the multirow cell covering it.
    constexpr std::size_t kFree = static_cast<std::size_t>(-1);
    std::vector<std::vector<std::size_t>> owner(static_cast<std::size_t>(n_rows),
                                                std::vector<std::size_t>(static_cast<std::size_t>(n_cols), kFree));
    std::vector<Cell> cells;
    for (int r = 0; r < n_rows; ++r) {
        auto& row = rows[static_cast<std::size_t>(r)];
        auto& own = owner[static_cast<std::size_t>(r)];
        int c = 0;
        std::size_t k = 0;
        while (k < row.size()) {
            if (c < n_cols && own[static_cast<std::size_t>(c)] != kFree) {
                // Slots covered from above must be filled with empty placeholders.
                const Cell& coverer = cells[own[static_cast<std::size_t>(c)]];
                int width = coverer.col_span;
                while (width > 0 && k < row.size()) {
                    const auto& pc = row[k];
                    if (!pc.blank || pc.raw.col_span > width) {
                        detail::fail(F, original, pc.raw.offset,
                                     fmt::format("row {} column {} is covered by the \\multirow at ({}, {}) and "
                                                 "must be left empty",
                                                 r + 1, c + 1, coverer.anchor_row, coverer.anchor_col));
                    }
                    width -= pc.raw.col_span;
                    ++k;
                }
                c += coverer.col_span - width;
                if (width > 0) break;
                continue;
            }
            const auto& raw = row[k].raw;
            const int rs = std::min(raw.row_span, n_rows - r);
            const int cs = raw.col_span;
            if (c + cs > n_cols) {
                detail::fail(F, original, raw.offset,
                             fmt::format("row {} has more cells than the {} declared columns", r + 1, n_cols));
            }
            const std::size_t ordinal = cells.size();
            for (int rr = r; rr < r + rs; ++rr) {
                for (int cc = c; cc < c + cs; ++cc) {
                    auto& slot = owner[static_cast<std::size_t>(rr)][static_cast<std::size_t>(cc)];
                    if (slot != kFree && !(rr == r && cc == c)) {
                        detail::fail(F, original, raw.offset,
                                     fmt::format("cell at row {}, column {} overlaps a spanning cell", r + 1, c + 1));
                    }
                    if (rr != r) slot = ordinal;
                }
            }
            for (int cc = c; cc < c + cs; ++cc) own[static_cast<std::size_t>(cc)] = ordinal;
            cells.push_back(Cell{r + 1, c + 1, rs, cs, raw.content, r < header_rows});
            c += cs;
            ++k;
        }
        for (int cc = 0; cc < n_cols; ++cc) {
            if (own[static_cast<std::size_t>(cc)] == kFree) {
                own[static_cast<std::size_t>(cc)] = cells.size();
                cells.push_back(Cell{r + 1, cc + 1, 1, 1, "", r < header_rows});
            }
        }
    }
    return Table(n_rows, n_cols, std::move(cells), std::move(caption), F);
}

std::string serialize_latex(const Table& t) {
    // Header rows: longest prefix of rows whose anchored cells are all headers,
    // provided at least one body row follows.
    int header_rows = 0;
    for (int r = 1; r < t.n_rows(); ++r) {
        bool all = true;
        for (const auto& c : t.cells()) {
            if (c.anchor_row == r && !c.is_header) all = false;
        }
        if (!all) break;
        header_rows = r;
    }

    std::string out = "\\begin{tabular}{" + std::string(static_cast<std::size_t>(t.n_cols()), 'c') + "}\n";
    for (int r = 1; r <= t.n_rows(); ++r) {
        std::vector<std::string> parts;
        for (int c = 1; c <= t.n_cols();) {
            const Cell& cell = t.cell_at({r, c});
            const int w = cell.col_span;
            if (cell.anchor_row == r) {
                std::string body = escape_latex(cell.content);
                if (cell.row_span > 1) body = fmt::format("\\multirow{{{}}}{{*}}{{{}}}", cell.row_span, body);
                if (w > 1) body = fmt::format("\\multicolumn{{{}}}{{c}}{{{}}}", w, body);
                parts.push_back(std::move(body));
            } else {
                parts.push_back(w > 1 ? fmt::format("\\multicolumn{{{}}}{{c}}{{}}", w) : std::string());
            }
            c += w;
        }
        out += text::join(parts, " & ") + " \\\\\n";
        if (r == header_rows) out += "\\hline\n";
    }
    out += "\\end{tabular}";
    return out;
}

}  // namespace tabgls::codec
