#include "tabgls/eval.hpp"

#include <algorithm>
#include <fstream>
#include <regex>

#include <fmt/format.h>

#include "tabgls/errors.hpp"
#include "tabgls/pipeline.hpp"
#include "tabgls/text.hpp"

namespace tabgls::eval {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<Task, 8> kTasks{Task::tsd, Task::tce, Task::tcl, Task::mcd,
                                     Task::rce_row, Task::rce_col, Task::tqa, Task::tfv};

bool is_quote(char c) { return c == '"' || c == '\'' || c == '`'; }

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Canonical decimal for [+-]?digits-with-optional-thousands[.digits], or
// nullopt when s is not such a number.
std::optional<std::string> canonical_number(std::string_view s) {
    bool negative = false;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    const auto dot = s.find('.');
    std::string_view int_part = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view() : s.substr(dot + 1);
    if (dot != std::string_view::npos && !all_digits(frac)) return std::nullopt;
    if (int_part.empty() && frac.empty()) return std::nullopt;

    std::string digits;
    if (int_part.find(',') != std::string_view::npos) {
        std::size_t start = 0;
        bool first = true;
        while (true) {
            const auto comma = int_part.find(',', start);
            const auto group = int_part.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            if (!all_digits(group)) return std::nullopt;
            if (first ? group.size() > 3 : group.size() != 3) return std::nullopt;
            digits += group;
            first = false;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
    } else {
        if (!int_part.empty() && !all_digits(int_part)) return std::nullopt;
        digits = std::string(int_part);
    }
    const auto nz = digits.find_first_not_of('0');
    digits = nz == std::string::npos ? "0" : digits.substr(nz);
    std::string f(frac);
    while (!f.empty() && f.back() == '0') f.pop_back();
    std::string out = f.empty() ? digits : digits + "." + f;
    if (negative && out != "0") out = "-" + out;
    return out;
}

std::string normalize_step(std::string s, NormalizedAnswer& flags) {
    s = text::collapse_whitespace(text::to_lower(s));
    while (s.size() >= 2 && is_quote(s.front()) && s.back() == s.front()) {
        s = std::string(text::trim(std::string_view(s).substr(1, s.size() - 2)));
    }
    if (!s.empty() && s.back() == '.') s = std::string(text::trim(std::string_view(s).substr(0, s.size() - 1)));

    std::string_view core = s;
    bool currency = false;
    bool percent = false;
    if (!core.empty() && core.front() == '$') {
        currency = true;
        core = text::trim(core.substr(1));
    }
    if (!core.empty() && core.front() == '%') {
        percent = true;
        core = text::trim(core.substr(1));
    } else if (!core.empty() && core.back() == '%') {
        percent = true;
        core = text::trim(core.substr(0, core.size() - 1));
    }
    if (auto num = canonical_number(core)) {
        flags.had_currency |= currency;
        flags.had_percent |= percent;
        return *num;
    }
    return s;
}

std::vector<ojson> json_objects(std::string_view s) {
    try {
        return pipeline::extract_json_all(s);
    } catch (const ExtractionError&) {
        return {};
    }
}

std::optional<nlohmann::json> json_array(std::string_view s) {
    auto trimmed = text::trim(s);
    const auto start = trimmed.find('[');
    const auto end = trimmed.rfind(']');
    if (start == std::string_view::npos || end == std::string_view::npos || end < start) return std::nullopt;
    auto j = nlohmann::json::parse(trimmed.substr(start, end - start + 1), nullptr, false);
    if (j.is_discarded() || !j.is_array()) return std::nullopt;
    return j;
}

std::string item_string(const nlohmann::json& v) { return pipeline::answer_to_string(ojson(v)); }

std::string index_item(long r, long c) { return fmt::format("({}, {})", r, c); }
std::string region_item(long r, long c, long rs, long cs) { return fmt::format("({}, {}, {}, {})", r, c, rs, cs); }

std::optional<long> int_of(const nlohmann::json& v) {
    if (v.is_number_integer()) return v.get<long>();
    if (v.is_string() && all_digits(text::trim(v.get<std::string>()))) return std::stol(v.get<std::string>());
    return std::nullopt;
}

std::optional<long> int_field(const nlohmann::json& o, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        if (auto it = o.find(k); it != o.end()) {
            if (auto v = int_of(*it)) return v;
        }
    }
    return std::nullopt;
}

std::vector<std::string> strings_of(const nlohmann::json& arr, const std::string& id, Task task) {
    if (!arr.is_array()) throw DataError(fmt::format("gold {}: {} payload must be an array", id, to_string(task)));
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!(v.is_string() || v.is_number() || v.is_boolean())) {
            throw DataError(fmt::format("gold {}: {} items must be scalars", id, to_string(task)));
        }
        out.push_back(item_string(v));
    }
    return out;
}

std::vector<std::string> int_tuples(const nlohmann::json& arr, std::size_t width, const std::string& id, Task task) {
    if (!arr.is_array()) throw DataError(fmt::format("gold {}: {} payload must be an array", id, to_string(task)));
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_array() || v.size() != width || !std::all_of(v.begin(), v.end(), [](const auto& x) { return x.is_number_integer(); })) {
            throw DataError(fmt::format("gold {}: {} items must be arrays of {} integers", id, to_string(task), width));
        }
        out.push_back(width == 2 ? index_item(v[0], v[1]) : region_item(v[0], v[1], v[2], v[3]));
    }
    return out;
}

Rational mean(const std::vector<Rational>& xs) {
    if (xs.empty()) return Rational(0);
    Rational s(0);
    for (const auto& x : xs) s += x;
    return s / Rational(static_cast<long>(xs.size()));
}

}  // namespace

std::string to_string(const Rational& r) {
    const auto num = boost::multiprecision::numerator(r);
    const auto den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string_view to_string(Task t) {
    switch (t) {
        case Task::tsd: return "tsd";
        case Task::tce: return "tce";
        case Task::tcl: return "tcl";
        case Task::mcd: return "mcd";
        case Task::rce_row: return "rce_row";
        case Task::rce_col: return "rce_col";
        case Task::tqa: return "tqa";
        case Task::tfv: return "tfv";
    }
    return "tqa";
}

Task task_from_string(std::string_view s) {
    for (auto t : kTasks) {
        if (to_string(t) == s) return t;
    }
    throw DataError(fmt::format("unknown task \"{}\"", s));
}

NormalizedAnswer normalize_answer_detailed(std::string_view raw) {
    NormalizedAnswer out;
    std::string cur(raw);
    for (int guard = 0; guard < 64; ++guard) {
        auto next = normalize_step(cur, out);
        if (next == cur) break;
        cur = std::move(next);
    }
    out.text = std::move(cur);
    return out;
}

std::string normalize_answer(std::string_view raw) { return normalize_answer_detailed(raw).text; }

TsdScore eval_tsd(std::optional<std::pair<int, int>> pred, std::pair<int, int> gold) {
    if (!pred) return {};
    return {pred->first == gold.first ? 1 : 0, pred->second == gold.second ? 1 : 0};
}

Rational eval_cell_accuracy(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (gold.empty()) return Rational(pred.empty() ? 1 : 0);
    long hits = 0;
    for (std::size_t i = 0; i < gold.size() && i < pred.size(); ++i) {
        if (normalize_answer(pred[i]) == normalize_answer(gold[i])) ++hits;
    }
    return Rational(hits, static_cast<long>(gold.size()));
}

F1Score eval_cell_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    std::set<std::string> p;
    std::set<std::string> g;
    for (const auto& x : pred) p.insert(normalize_answer(x));
    for (const auto& x : gold) g.insert(normalize_answer(x));
    long tp = 0;
    for (const auto& x : p) tp += static_cast<long>(g.count(x));
    F1Score s;
    s.precision = p.empty() ? Rational(0) : Rational(tp, static_cast<long>(p.size()));
    s.recall = g.empty() ? Rational(0) : Rational(tp, static_cast<long>(g.size()));
    const auto denom = static_cast<long>(p.size() + g.size());
    s.f1 = (tp == 0 || denom == 0) ? Rational(0) : Rational(2 * tp, denom);
    return s;
}

std::string TfvLabels::canonical(std::string_view label) const {
    const auto n = normalize_answer(label);
    if (supports.count(n)) return "supports";
    if (refutes.count(n)) return "refutes";
    return n;
}

std::vector<std::string> split_answer_items(std::string_view answer) {
    if (auto arr = json_array(answer)) {
        std::vector<std::string> out;
        for (const auto& v : *arr) out.push_back(item_string(v));
        return out;
    }
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        auto t = text::trim(cur);
        if (!t.empty()) out.emplace_back(t);
        cur.clear();
    };
    for (std::size_t i = 0; i < answer.size(); ++i) {
        const char c = answer[i];
        if (c == '|' || c == ';' || c == '\n' || (c == ',' && i + 1 < answer.size() && answer[i + 1] == ' ')) {
            flush();
        } else {
            cur += c;
        }
    }
    flush();
    return out;
}

int eval_qa(std::string_view pred, const std::vector<std::string>& gold) {
    if (gold.empty()) return 0;
    if (gold.size() == 1) return normalize_answer(pred) == normalize_answer(gold.front()) ? 1 : 0;
    std::set<std::string> p;
    std::set<std::string> g;
    for (const auto& x : split_answer_items(pred)) p.insert(normalize_answer(x));
    for (const auto& x : gold) g.insert(normalize_answer(x));
    return p == g ? 1 : 0;
}

int eval_tfv(std::string_view pred, std::string_view gold, const TfvLabels& labels) {
    return labels.canonical(pred) == labels.canonical(gold) ? 1 : 0;
}

std::optional<std::pair<int, int>> parse_tsd_prediction(std::string_view answer) {
    for (auto it = json_objects(answer); !it.empty(); it.pop_back()) {
        const nlohmann::json o(it.back());
        auto r = int_field(o, {"rows", "row", "n_rows", "num_rows", "row_count"});
        auto c = int_field(o, {"columns", "cols", "column", "n_cols", "num_columns", "column_count"});
        if (r && c) return std::make_pair(static_cast<int>(*r), static_cast<int>(*c));
        if (auto a = o.find("answer"); a != o.end() && a->is_string()) return parse_tsd_prediction(a->get<std::string>());
    }
    const std::string s(answer);
    static const std::regex rows_re(R"((\d+)\s*rows?\b)", std::regex::icase);
    static const std::regex cols_re(R"((\d+)\s*col(umn)?s?\b)", std::regex::icase);
    static const std::regex cross_re(R"((\d+)\s*(?:x|\*|×|by)\s*(\d+))", std::regex::icase);
    std::smatch mr;
    std::smatch mc;
    if (std::regex_search(s, mr, rows_re) && std::regex_search(s, mc, cols_re) && mr[1].length() < 9 &&
        mc[1].length() < 9) {
        return std::make_pair(std::stoi(mr[1]), std::stoi(mc[1]));
    }
    if (std::regex_search(s, mr, cross_re) && mr[1].length() < 9 && mr[2].length() < 9) {
        return std::make_pair(std::stoi(mr[1]), std::stoi(mr[2]));
    }
    return std::nullopt;
}

std::vector<std::string> parse_list_prediction(std::string_view answer) {
    if (auto arr = json_array(answer)) {
        std::vector<std::string> out;
        for (const auto& v : *arr) out.push_back(item_string(v));
        return out;
    }
    try {
        auto cells = pipeline::scan_cell_lines(answer);
        if (!cells.empty()) {
            std::vector<std::string> out;
            for (const auto& c : cells) out.push_back(c.content);
            return out;
        }
    } catch (const ParseError&) {
    }
    return split_answer_items(answer);
}

std::vector<std::string> parse_index_prediction(std::string_view answer) {
    std::vector<std::string> out;
    if (auto arr = json_array(answer)) {
        for (const auto& v : *arr) {
            if (v.is_array() && v.size() == 2 && int_of(v[0]) && int_of(v[1])) {
                out.push_back(index_item(*int_of(v[0]), *int_of(v[1])));
            } else if (v.is_object()) {
                auto r = int_field(v, {"row", "r"});
                auto c = int_field(v, {"column", "col", "c"});
                if (r && c) out.push_back(index_item(*r, *c));
            }
        }
        if (!out.empty()) return out;
    }
    static const std::regex re(R"(row\s*(\d{1,8})\s*,?\s*col(?:umn)?\s*(\d{1,8})|\(\s*(\d{1,8})\s*,\s*(\d{1,8})\s*\))",
                               std::regex::icase);
    const std::string s(answer);
    for (std::sregex_iterator it(s.begin(), s.end(), re), end; it != end; ++it) {
        const auto& m = *it;
        if (m[1].matched) {
            out.push_back(index_item(std::stol(m[1]), std::stol(m[2])));
        } else {
            out.push_back(index_item(std::stol(m[3]), std::stol(m[4])));
        }
    }
    return out;
}

std::vector<std::string> parse_region_prediction(std::string_view answer) {
    std::vector<std::string> out;
    if (auto arr = json_array(answer)) {
        for (const auto& v : *arr) {
            if (v.is_array() && v.size() == 4 && std::all_of(v.begin(), v.end(), [](const auto& x) { return int_of(x).has_value(); })) {
                out.push_back(region_item(*int_of(v[0]), *int_of(v[1]), *int_of(v[2]), *int_of(v[3])));
            } else if (v.is_object()) {
                auto r = int_field(v, {"row"});
                auto c = int_field(v, {"column", "col"});
                auto rs = int_field(v, {"row_span", "rowspan"});
                auto cs = int_field(v, {"col_span", "colspan", "column_span"});
                if (r && c && rs && cs) out.push_back(region_item(*r, *c, *rs, *cs));
            }
        }
        if (!out.empty()) return out;
    }
    static const std::regex re(R"(\(\s*(\d{1,8})\s*,\s*(\d{1,8})\s*,\s*(\d{1,8})\s*,\s*(\d{1,8})\s*\))");
    const std::string s(answer);
    for (std::sregex_iterator it(s.begin(), s.end(), re), end; it != end; ++it) {
        const auto& m = *it;
        out.push_back(region_item(std::stol(m[1]), std::stol(m[2]), std::stol(m[3]), std::stol(m[4])));
    }
    return out;
}

GoldRecord gold_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("gold record must be a JSON object");
    GoldRecord g;
    auto id = j.find("id");
    if (id == j.end()) throw DataError("gold record has no \"id\"");
    g.id = id->is_string() ? id->get<std::string>() : id->dump();
    auto task = j.find("task");
    if (task == j.end() || !task->is_string()) throw DataError(fmt::format("gold {}: \"task\" must be a string", g.id));
    g.task = task_from_string(task->get<std::string>());
    auto gold = j.find("gold");
    if (gold == j.end()) throw DataError(fmt::format("gold {}: \"gold\" is missing", g.id));
    const auto& p = *gold;
    switch (g.task) {
        case Task::tsd: {
            std::optional<long> r;
            std::optional<long> c;
            if (p.is_array() && p.size() == 2) {
                r = int_of(p[0]);
                c = int_of(p[1]);
            } else if (p.is_object()) {
                r = int_field(p, {"rows"});
                c = int_field(p, {"columns", "cols"});
            }
            if (!r || !c) throw DataError(fmt::format("gold {}: tsd payload must be [rows, cols]", g.id));
            g.gold = nlohmann::json::array({*r, *c});
            break;
        }
        case Task::tce:
        case Task::rce_row:
        case Task::rce_col: g.gold = strings_of(p, g.id, g.task); break;
        case Task::tcl: g.gold = int_tuples(p, 2, g.id, g.task); break;
        case Task::mcd: g.gold = int_tuples(p, 4, g.id, g.task); break;
        case Task::tqa:
            if (p.is_array()) {
                g.gold = strings_of(p, g.id, g.task);
                if (g.gold.empty()) throw DataError(fmt::format("gold {}: tqa answer set is empty", g.id));
            } else if (p.is_string() || p.is_number()) {
                g.gold = nlohmann::json::array({item_string(p)});
            } else {
                throw DataError(fmt::format("gold {}: tqa payload must be a string or a list", g.id));
            }
            break;
        case Task::tfv:
            if (!(p.is_string() || p.is_boolean() || p.is_number_integer())) {
                throw DataError(fmt::format("gold {}: tfv payload must be a label", g.id));
            }
            g.gold = item_string(p);
            break;
    }
    return g;
}

PredictionInput prediction_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("prediction must be a JSON object");
    PredictionInput p;
    auto id = j.find("id");
    if (id == j.end()) throw DataError("prediction has no \"id\"");
    p.id = id->is_string() ? id->get<std::string>() : id->dump();
    p.mode = j.value("mode", std::string("unknown"));
    if (auto a = j.find("answer"); a != j.end() && !a->is_null()) p.answer = item_string(*a);
    p.failed = j.value("failed", false);
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
        if (auto c = u->find("completion_tokens"); c != u->end() && c->is_number_integer()) {
            p.completion_tokens = c->get<std::int64_t>();
        }
    }
    return p;
}

std::map<std::string, TokenStat> token_stats(const std::vector<PredictionInput>& preds) {
    std::map<std::string, std::pair<std::size_t, Rational>> acc;
    for (const auto& p : preds) {
        if (!p.completion_tokens) continue;
        auto& [n, sum] = acc[p.mode];
        ++n;
        sum += Rational(static_cast<long>(*p.completion_tokens));
    }
    std::map<std::string, TokenStat> out;
    for (const auto& [mode, v] : acc) out[mode] = TokenStat{v.first, v.second / Rational(static_cast<long>(v.first))};
    return out;
}

MetricReport aggregate(const std::vector<PredictionInput>& preds, const std::vector<GoldRecord>& golds,
                       const EvalOptions& options) {
    std::map<std::string, const GoldRecord*> by_id;
    for (const auto& g : golds) {
        if (!by_id.emplace(g.id, &g).second) throw ReconciliationError(fmt::format("duplicate gold id {}", g.id));
    }
    std::map<std::string, const PredictionInput*> pred_by_id;
    std::vector<std::string> extra;
    for (const auto& p : preds) {
        if (!pred_by_id.emplace(p.id, &p).second) throw ReconciliationError(fmt::format("duplicate prediction id {}", p.id));
        if (!by_id.count(p.id)) extra.push_back(p.id);
    }
    std::vector<std::string> missing;
    for (const auto& [id, g] : by_id) {
        if (!pred_by_id.count(id)) missing.push_back(id);
    }
    if (!missing.empty() || !extra.empty()) {
        auto list = [](std::vector<std::string> ids) {
            std::sort(ids.begin(), ids.end());
            const auto n = ids.size();
            if (n > 20) ids.resize(20);
            return text::join(ids, ", ") + (n > 20 ? fmt::format(" (+{} more)", n - 20) : "");
        };
        std::string msg = "predictions and golds do not match";
        if (!missing.empty()) msg += fmt::format("; missing predictions for {} id(s): {}", missing.size(), list(missing));
        if (!extra.empty()) msg += fmt::format("; predictions for {} unknown id(s): {}", extra.size(), list(extra));
        throw ReconciliationError(msg);
    }

    std::map<Task, std::map<std::string, std::vector<Rational>>> scores;
    std::map<Task, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& [id, g] : by_id) {
        const auto& p = *pred_by_id.at(id);
        auto& s = scores[g->task];
        auto& [n, failed] = counts[g->task];
        ++n;
        if (p.failed) ++failed;
        auto push = [&](const char* name, Rational v) { s[name].push_back(p.failed ? Rational(0) : v); };
        auto gold_strings = [&] { return g->gold.get<std::vector<std::string>>(); };
        switch (g->task) {
            case Task::tsd: {
                auto sc = eval_tsd(parse_tsd_prediction(p.answer), {g->gold[0].get<int>(), g->gold[1].get<int>()});
                push("row_accuracy", Rational(sc.row));
                push("col_accuracy", Rational(sc.col));
                break;
            }
            case Task::tce: push("accuracy", eval_cell_accuracy(parse_list_prediction(p.answer), gold_strings())); break;
            case Task::tcl: push("accuracy", eval_cell_accuracy(parse_index_prediction(p.answer), gold_strings())); break;
            case Task::mcd:
            case Task::rce_row:
            case Task::rce_col: {
                const auto pred = g->task == Task::mcd ? parse_region_prediction(p.answer) : parse_list_prediction(p.answer);
                const auto f = eval_cell_f1(pred, gold_strings());
                push("precision", f.precision);
                push("recall", f.recall);
                push("f1", f.f1);
                break;
            }
            case Task::tqa: push("accuracy", Rational(eval_qa(p.answer, gold_strings()))); break;
            case Task::tfv:
                push("accuracy", Rational(eval_tfv(p.answer, g->gold.get<std::string>(), options.tfv_labels)));
                break;
        }
    }

    MetricReport report;
    std::vector<Rational> primaries;
    for (const auto& [task, metrics] : scores) {
        TaskReport tr;
        tr.n = counts[task].first;
        tr.failed = counts[task].second;
        for (const auto& [name, xs] : metrics) tr.metrics[name] = mean(xs);
        if (task == Task::tsd) {
            tr.primary = (tr.metrics["row_accuracy"] + tr.metrics["col_accuracy"]) / Rational(2);
        } else if (tr.metrics.count("f1")) {
            tr.primary = tr.metrics["f1"];
        } else {
            tr.primary = tr.metrics["accuracy"];
        }
        primaries.push_back(tr.primary);
        report.per_task.emplace(task, std::move(tr));
    }
    report.overall = mean(primaries);
    report.token_stats = token_stats(preds);
    return report;
}

ojson to_json(const MetricReport& report) {
    ojson per_task = ojson::object();
    for (const auto& [task, tr] : report.per_task) {
        ojson metrics = ojson::object();
        ojson exact = ojson::object();
        for (const auto& [name, v] : tr.metrics) {
            metrics[name] = to_double(v);
            exact[name] = to_string(v);
        }
        exact["primary"] = to_string(tr.primary);
        per_task[std::string(to_string(task))] = {{"n", tr.n},
                                                  {"failed", tr.failed},
                                                  {"primary", to_double(tr.primary)},
                                                  {"metrics", metrics},
                                                  {"exact", exact}};
    }
    ojson tokens = ojson::object();
    for (const auto& [mode, ts] : report.token_stats) {
        tokens[mode] = {{"n", ts.n},
                        {"mean_completion_tokens", to_double(ts.mean_completion_tokens)},
                        {"exact", to_string(ts.mean_completion_tokens)}};
    }
    return ojson{{"per_task", per_task},
                 {"overall", to_double(report.overall)},
                 {"overall_exact", to_string(report.overall)},
                 {"token_stats", tokens}};
}

std::string to_text(const MetricReport& report) {
    std::string out = fmt::format("{:<9} {:>7} {:>7}  {:<13} {:>8}\n", "task", "n", "failed", "metric", "score");
    for (const auto& [task, tr] : report.per_task) {
        for (const auto& [name, v] : tr.metrics) {
            out += fmt::format("{:<9} {:>7} {:>7}  {:<13} {:>8.4f}\n", to_string(task), tr.n, tr.failed, name,
                               to_double(v));
        }
    }
    out += fmt::format("{:<9} {:>7} {:>7}  {:<13} {:>8.4f}\n", "overall", "", "", "mean", to_double(report.overall));
    if (!report.token_stats.empty()) {
        out += fmt::format("\n{:<15} {:>7}  {:>22}\n", "mode", "n", "mean_completion_tokens");
        for (const auto& [mode, ts] : report.token_stats) {
            out += fmt::format("{:<15} {:>7}  {:>22.2f}\n", mode, ts.n, to_double(ts.mean_completion_tokens));
        }
    }
    return out;
}

namespace {

template <class T, class F>
std::vector<T> read_jsonl(const std::filesystem::path& path, F convert) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot read {}", path.string()));
    std::vector<T> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw DataError(fmt::format("{}:{}: not valid JSON", path.string(), n));
        try {
            out.push_back(convert(j));
        } catch (const DataError& e) {
            throw DataError(fmt::format("{}:{}: {}", path.string(), n, e.what()));
        }
    }
    return out;
}

}  // namespace

std::vector<PredictionInput> read_predictions(const std::filesystem::path& path) {
    return read_jsonl<PredictionInput>(path, prediction_from_json);
}

std::vector<GoldRecord> read_golds(const std::filesystem::path& path) {
    return read_jsonl<GoldRecord>(path, gold_from_json);
}

}  // namespace tabgls::eval
