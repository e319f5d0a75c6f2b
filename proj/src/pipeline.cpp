#include "tabgls/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <regex>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tabgls/errors.hpp"
#include "tabgls/text.hpp"

namespace tabgls::pipeline {

using ojson = nlohmann::ordered_json;

namespace {

std::vector<std::string> string_list(const ojson& j, const char* key, const std::string& raw) {
    if (!j.is_array()) throw SchemaError(key, raw);
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (v.is_string()) {
            out.push_back(v.get<std::string>());
        } else if (v.is_number() || v.is_boolean()) {
            out.push_back(answer_to_string(v));
        } else {
            throw SchemaError(key, raw);
        }
    }
    return out;
}

std::string strip_quotes(std::string_view s) {
    s = text::trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

// End of the balanced region opening at `open`, honouring JSON strings.
std::size_t match_brace(std::string_view s, std::size_t open, bool strings) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"' && strings) {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

std::string drop_trailing_commas(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            out += c;
            if (c == '\\' && i + 1 < s.size()) {
                out += s[++i];
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') in_string = true;
        if (c == ',') {
            std::size_t j = i + 1;
            while (j < s.size() && text::is_space(s[j])) ++j;
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
        }
        out += c;
    }
    return out;
}

std::string unescape_quotes(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == '"') continue;
        out += s[i];
    }
    return out;
}

std::optional<ojson> try_parse_object(std::string_view region) {
    for (const auto& candidate : {std::string(region), drop_trailing_commas(region),
                                  drop_trailing_commas(unescape_quotes(region))}) {
        auto j = ojson::parse(candidate, nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
    }
    return std::nullopt;
}

void scan_regions(std::string_view s, std::vector<ojson>& out) {
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '{') {
            ++i;
            continue;
        }
        auto end = match_brace(s, i, true);
        if (end == std::string_view::npos) end = match_brace(s, i, false);
        if (end == std::string_view::npos) {
            ++i;
            continue;
        }
        const auto region = s.substr(i, end - i + 1);
        if (auto j = try_parse_object(region)) {
            out.push_back(std::move(*j));
        } else {
            scan_regions(region.substr(1, region.size() - 2), out);
        }
        i = end + 1;
    }
}

std::string strip_fences(std::string_view s) {
    std::string out(s);
    for (std::size_t pos = out.find("```"); pos != std::string::npos; pos = out.find("```", pos)) {
        std::size_t end = pos + 3;
        while (end < out.size() && std::isalnum(static_cast<unsigned char>(out[end]))) ++end;
        out.replace(pos, end - pos, " ");
    }
    return out;
}

const std::regex& cell_line_regex() {
    static const std::regex re(R"(^\s*(?:[-*]\s*)?row\s*(\d+)\s*,?\s*column\s*(\d+)\s*:(.*)$)",
                               std::regex::icase | std::regex::ECMAScript);
    return re;
}

}  // namespace

ReasoningPlan plan_from_json(const ojson& j, const std::string& raw_response) {
    if (!j.is_object()) throw SchemaError("target_columns", raw_response);
    ReasoningPlan plan;
    plan.raw = j;
    if (auto it = j.find("thought"); it != j.end()) {
        plan.thought = it->is_string() ? it->get<std::string>() : it->dump();
    }
    auto cols = j.find("target_columns");
    if (cols == j.end()) throw SchemaError("target_columns", raw_response);
    plan.target_columns = string_list(*cols, "target_columns", raw_response);
    auto rows = j.find("target_rows");
    if (rows == j.end()) throw SchemaError("target_rows", raw_response);
    if (rows->is_string()) {
        plan.target_rows = rows->get<std::string>();
    } else {
        plan.target_rows = string_list(*rows, "target_rows", raw_response);
    }
    return plan;
}

ojson to_json(const ReasoningPlan& plan) {
    if (plan.raw.is_object()) return plan.raw;
    ojson j{{"thought", plan.thought}, {"target_columns", plan.target_columns}};
    if (plan.rows_is_condition()) {
        j["target_rows"] = std::get<std::string>(plan.target_rows);
    } else {
        j["target_rows"] = std::get<std::vector<std::string>>(plan.target_rows);
    }
    return j;
}

ReasoningPlan empty_plan() {
    ReasoningPlan plan;
    plan.target_rows = std::vector<std::string>{};
    plan.raw = to_json(plan);
    return plan;
}

std::string render_plan(const ReasoningPlan& plan) {
    return to_json(plan).dump(4, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::vector<SubTableCell> scan_cell_lines(std::string_view body) {
    std::vector<SubTableCell> cells;
    std::set<std::pair<int, int>> seen;
    const auto lines = text::split_lines(body);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::smatch m;
        if (!std::regex_match(lines[i], m, cell_line_regex())) continue;
        const auto r = m[1].str();
        const auto c = m[2].str();
        if (r.size() > 9 || c.size() > 9) continue;
        const int row = std::stoi(r);
        const int col = std::stoi(c);
        if (row < 1 || col < 1) continue;
        if (!seen.insert({row, col}).second) {
            throw ParseError("subtable", i + 1, 0, fmt::format("duplicate cell Row {} Column {}", row, col));
        }
        cells.push_back({GridIndex{row, col}, std::string(text::trim(m[3].str()))});
    }
    return cells;
}

SubTable parse_subtable(std::string_view s) {
    constexpr std::string_view kMarker = "Sub-table:";
    constexpr std::string_view kEvaluation = "Plan Evaluation:";
    const auto marker = text::ifind(s, kMarker);
    if (marker == std::string_view::npos) {
        throw StageError("response has no \"Sub-table:\" marker", std::string(s));
    }
    SubTable sub;
    const auto eval = text::ifind(s.substr(0, marker), kEvaluation);
    if (eval != std::string_view::npos) {
        const auto from = eval + kEvaluation.size();
        sub.plan_evaluation = strip_quotes(s.substr(from, marker - from));
    }
    sub.cells = scan_cell_lines(s.substr(marker + kMarker.size()));
    if (sub.cells.empty()) throw EmptyEvidenceError("sub-table has no cell lines", std::string(s));
    return sub;
}

std::string render_subtable_lines(const SubTable& sub) {
    std::vector<std::string> lines;
    lines.reserve(sub.cells.size());
    for (const auto& c : sub.cells) lines.push_back(fmt::format("Row {} Column {}: {}", c.at.row, c.at.col, c.content));
    return text::join(lines, "\n");
}

std::string render_subtable(const SubTable& sub) {
    return fmt::format("Plan Evaluation: \"{}\"\nSub-table:\n{}", sub.plan_evaluation, render_subtable_lines(sub));
}

SubTable subtable_from_plan(const ReasoningPlan& plan) {
    SubTable sub;
    sub.plan_evaluation = "plan used as evidence";
    int col = 2;
    for (const auto& label : plan.target_columns) sub.cells.push_back({GridIndex{1, col++}, label});
    int row = 2;
    if (plan.rows_is_condition()) {
        const auto& cond = std::get<std::string>(plan.target_rows);
        if (!text::trim(cond).empty()) sub.cells.push_back({GridIndex{row, 1}, cond});
    } else {
        for (const auto& label : std::get<std::vector<std::string>>(plan.target_rows)) {
            sub.cells.push_back({GridIndex{row++, 1}, label});
        }
    }
    return sub;
}

std::vector<ojson> extract_json_all(std::string_view s) {
    std::vector<ojson> out;
    scan_regions(strip_fences(s), out);
    if (out.empty()) throw ExtractionError("no parseable JSON object in response");
    return out;
}

ojson extract_json(std::string_view s) { return extract_json_all(s).back(); }

std::string answer_to_string(const ojson& v) {
    switch (v.type()) {
        case ojson::value_t::string: return v.get<std::string>();
        case ojson::value_t::number_integer: return std::to_string(v.get<std::int64_t>());
        case ojson::value_t::number_unsigned: return std::to_string(v.get<std::uint64_t>());
        case ojson::value_t::number_float: {
            const double d = v.get<double>();
            if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 1e15) {
                return std::to_string(static_cast<std::int64_t>(d));
            }
            return v.dump();
        }
        case ojson::value_t::boolean: return v.get<bool>() ? "true" : "false";
        case ojson::value_t::null: return "";
        default: return v.dump();
    }
}

FinalAnswer parse_final_answer(std::string_view s) {
    std::vector<ojson> objects;
    try {
        objects = extract_json_all(s);
    } catch (const ExtractionError&) {
        throw StageError("no JSON object with an \"answer\" key", std::string(s));
    }
    FinalAnswer fa;
    bool found = false;
    for (auto it = objects.rbegin(); it != objects.rend(); ++it) {
        if (auto a = it->find("answer"); a != it->end()) {
            fa.answer = answer_to_string(*a);
            found = true;
            break;
        }
    }
    if (!found) throw StageError("no JSON object with an \"answer\" key", std::string(s));
    constexpr std::string_view kReasoning = "Reasoning:";
    if (auto pos = text::ifind(s, kReasoning); pos != std::string_view::npos) {
        auto rest = s.substr(pos + kReasoning.size());
        fa.reasoning = strip_quotes(rest.substr(0, rest.find('{')));
    }
    return fa;
}

ojson to_json(const StageTranscript& t) {
    ojson parsed = nullptr;
    if (t.parsed) {
        if (const auto* plan = std::get_if<ReasoningPlan>(&*t.parsed)) {
            parsed = to_json(*plan);
        } else if (const auto* sub = std::get_if<SubTable>(&*t.parsed)) {
            ojson cells = ojson::array();
            for (const auto& c : sub->cells) cells.push_back({c.at.row, c.at.col, c.content});
            parsed = {{"plan_evaluation", sub->plan_evaluation}, {"cells", cells}};
        } else {
            const auto& fa = std::get<FinalAnswer>(*t.parsed);
            parsed = {{"reasoning", fa.reasoning}, {"answer", fa.answer}};
        }
    }
    ojson usage = nullptr;
    if (t.usage) usage = {{"prompt_tokens", t.usage->prompt_tokens}, {"completion_tokens", t.usage->completion_tokens}};
    return ojson{{"stage", std::string(to_string(t.stage))},
                 {"prompt", t.prompt},
                 {"raw_response", t.raw_response},
                 {"parsed", parsed},
                 {"usage", usage},
                 {"attempts", t.attempts},
                 {"warnings", t.warnings}};
}

std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::gls: return "gls";
        case Mode::gls_minus_gse: return "gls_minus_gse";
        case Mode::gls_minus_sse: return "gls_minus_sse";
        case Mode::cot: return "cot";
        case Mode::direct: return "direct";
    }
    return "gls";
}

Mode mode_from_string(std::string_view s) {
    for (auto m : {Mode::gls, Mode::gls_minus_gse, Mode::gls_minus_sse, Mode::cot, Mode::direct}) {
        if (to_string(m) == s) return m;
    }
    throw ConfigError(fmt::format("unknown mode \"{}\" (expected gls, gls_minus_gse, gls_minus_sse, cot or direct)", s));
}

namespace {

// Sends the prompt, re-asking on parse failures. The transcript is filled in
// as it goes so callers keep it when the stage fails.
template <class Parse>
auto call_stage(gateway::Gateway& gw, Stage stage, std::string prompt, const std::string& image_ref,
                const PipelineOptions& opts, StageTranscript& t, Parse parse) -> decltype(parse(std::string())) {
    t.stage = stage;
    t.prompt = std::move(prompt);
    const auto request = gateway::make_request(opts.model_id, t.prompt, image_ref, opts.temperature, opts.max_tokens);
    std::exception_ptr last;
    for (int attempt = 0; attempt <= std::max(0, opts.max_reasks); ++attempt) {
        auto resp = gw.complete(request, attempt > 0);
        t.raw_response = std::move(resp.text);
        t.usage = resp.usage;
        t.cache_hit = resp.cache_hit;
        t.attempts = attempt + 1;
        try {
            return parse(t.raw_response);
        } catch (const EmptyEvidenceError&) {
            throw;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            spdlog::debug("{} attempt {} did not parse: {}", to_string(stage), attempt + 1, e.what());
            last = std::current_exception();
        }
    }
    std::rethrow_exception(last);
}

ReasoningPlan gse_into(gateway::Gateway& gw, const std::string& image_ref, const std::string& question,
                       const PipelineOptions& opts, StageTranscript& t) {
    auto plan = call_stage(gw, Stage::gse, prompts::render_gse(question), image_ref, opts, t,
                           [](const std::string& raw) {
                               ojson j;
                               try {
                                   j = extract_json(raw);
                               } catch (const ExtractionError& e) {
                                   throw StageError(e.what(), raw);
                               }
                               return plan_from_json(j, raw);
                           });
    t.parsed = plan;
    return plan;
}

SubTable sse_into(gateway::Gateway& gw, const std::string& image_ref, const std::string& question,
                  const ReasoningPlan& plan, const PipelineOptions& opts, StageTranscript& t) {
    auto sub = call_stage(gw, Stage::sse, prompts::render_sse(question, render_plan(plan)), image_ref, opts, t,
                          [](const std::string& raw) { return parse_subtable(raw); });
    t.parsed = sub;
    return sub;
}

FinalAnswer answer_into(gateway::Gateway& gw, Stage stage, std::string prompt, const std::string& image_ref,
                        const PipelineOptions& opts, StageTranscript& t) {
    auto fa = call_stage(gw, stage, std::move(prompt), image_ref, opts, t,
                         [](const std::string& raw) { return parse_final_answer(raw); });
    if (stage == Stage::egr && text::ifind(t.raw_response, "Reasoning:") == std::string_view::npos) {
        t.warnings.push_back("response has no \"Reasoning:\" line");
        spdlog::warn("egr response without a Reasoning: line");
    }
    t.parsed = fa;
    return fa;
}

FinalAnswer egr_into(gateway::Gateway& gw, const std::string& image_ref, const std::string& question,
                     const SubTable& sub, const PipelineOptions& opts, StageTranscript& t, bool allow_empty) {
    if (sub.cells.empty() && !allow_empty) throw PreconditionError("evidence sub-table is empty");
    return answer_into(gw, Stage::egr, prompts::render_egr(question, render_subtable_lines(sub)), image_ref, opts,
                       t);
}

FinalAnswer single_into(gateway::Gateway& gw, const std::string& image_ref, const std::string& question, Mode mode,
                        const PipelineOptions& opts, StageTranscript& t) {
    switch (mode) {
        case Mode::cot: return answer_into(gw, Stage::cot, prompts::render_cot(question), image_ref, opts, t);
        case Mode::direct:
            return answer_into(gw, Stage::direct, prompts::render_direct(question), image_ref, opts, t);
        default: break;
    }
    throw PreconditionError(fmt::format("mode {} is not a single-call mode", to_string(mode)));
}

StageTranscript& next(PipelineResult& res) { return res.transcripts.emplace_back(); }

void fall_back(gateway::Gateway& gw, const std::string& image_ref, const std::string& question,
               const PipelineOptions& opts, PipelineResult& res, const std::string& reason) {
    res.meta["fallback"] = "cot";
    res.meta["fallback_reason"] = reason;
    spdlog::info("empty evidence, falling back to cot: {}", reason);
    res.answer = single_into(gw, image_ref, question, Mode::cot, opts, next(res));
}

void run_into(gateway::Gateway& gw, const std::string& image_ref, const std::string& question, Mode mode,
              const PipelineOptions& opts, PipelineResult& res) {
    if (text::trim(question).empty()) throw PreconditionError("question must not be empty");
    if (mode == Mode::cot || mode == Mode::direct) {
        res.answer = single_into(gw, image_ref, question, mode, opts, next(res));
        return;
    }
    SubTable sub;
    try {
        if (mode == Mode::gls_minus_sse) {
            sub = subtable_from_plan(gse_into(gw, image_ref, question, opts, next(res)));
            if (sub.cells.empty()) throw EmptyEvidenceError("plan names no rows or columns", "");
        } else {
            const auto plan = mode == Mode::gls ? gse_into(gw, image_ref, question, opts, next(res)) : empty_plan();
            sub = sse_into(gw, image_ref, question, plan, opts, next(res));
        }
    } catch (const EmptyEvidenceError& e) {
        if (opts.empty_evidence == EmptyEvidencePolicy::fail) throw;
        fall_back(gw, image_ref, question, opts, res, e.what());
        return;
    }
    res.answer = egr_into(gw, image_ref, question, sub, opts, next(res), false);
}

}  // namespace

std::pair<ReasoningPlan, StageTranscript> run_gse(gateway::Gateway& gw, const std::string& image_ref,
                                                  const std::string& question, const PipelineOptions& opts) {
    StageTranscript t;
    auto plan = gse_into(gw, image_ref, question, opts, t);
    return {std::move(plan), std::move(t)};
}

std::pair<SubTable, StageTranscript> run_sse(gateway::Gateway& gw, const std::string& image_ref,
                                             const std::string& question, const ReasoningPlan& plan,
                                             const PipelineOptions& opts) {
    StageTranscript t;
    auto sub = sse_into(gw, image_ref, question, plan, opts, t);
    return {std::move(sub), std::move(t)};
}

std::pair<FinalAnswer, StageTranscript> run_egr(gateway::Gateway& gw, const std::string& image_ref,
                                                const std::string& question, const SubTable& sub,
                                                const PipelineOptions& opts, bool allow_empty) {
    StageTranscript t;
    auto fa = egr_into(gw, image_ref, question, sub, opts, t, allow_empty);
    return {std::move(fa), std::move(t)};
}

std::pair<FinalAnswer, StageTranscript> run_single(gateway::Gateway& gw, const std::string& image_ref,
                                                   const std::string& question, Mode mode,
                                                   const PipelineOptions& opts) {
    StageTranscript t;
    auto fa = single_into(gw, image_ref, question, mode, opts, t);
    return {std::move(fa), std::move(t)};
}

PipelineResult run_pipeline(gateway::Gateway& gw, const std::string& image_ref, const std::string& question,
                            Mode mode, const PipelineOptions& opts) {
    PipelineResult res;
    run_into(gw, image_ref, question, mode, opts, res);
    return res;
}

Example example_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("example must be a JSON object");
    Example ex;
    auto id = j.find("id");
    if (id == j.end()) throw DataError("example has no \"id\"");
    ex.id = id->is_string() ? id->get<std::string>() : id->dump();
    auto field = [&](const char* key, bool required) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            if (required) throw DataError(fmt::format("example {}: \"{}\" must be a string", ex.id, key));
            return std::string();
        }
        return it->get<std::string>();
    };
    ex.image_ref = field("image", true);
    ex.question = field("question", true);
    ex.task = field("task", false);
    return ex;
}

ojson to_json(const PredictionRecord& r) {
    ojson transcripts = ojson::array();
    for (const auto& t : r.transcripts) transcripts.push_back(to_json(t));
    ojson usage = nullptr;
    if (r.has_usage) usage = {{"prompt_tokens", r.usage.prompt_tokens}, {"completion_tokens", r.usage.completion_tokens}};
    ojson error = nullptr;
    if (r.failed) error = r.error;
    return ojson{{"id", r.id},
                 {"mode", std::string(to_string(r.mode))},
                 {"answer", r.answer},
                 {"failed", r.failed},
                 {"error", error},
                 {"transcripts", transcripts},
                 {"usage", usage},
                 {"meta", r.meta}};
}

PredictionRecord run_example(gateway::Gateway& gw, const Example& ex, Mode mode, const PipelineOptions& opts) {
    PredictionRecord rec;
    rec.id = ex.id;
    rec.mode = mode;
    PipelineResult res;
    try {
        run_into(gw, ex.image_ref, ex.question, mode, opts, res);
        rec.answer = res.answer.answer;
    } catch (const ConfigError&) {
        throw;
    } catch (const BackendError&) {
        throw;
    } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
        spdlog::warn("example {} failed: {}", ex.id, e.what());
    }
    rec.transcripts = std::move(res.transcripts);
    rec.meta = std::move(res.meta);
    for (const auto& t : rec.transcripts) {
        if (!t.usage) continue;
        rec.has_usage = true;
        rec.usage.prompt_tokens += t.usage->prompt_tokens;
        rec.usage.completion_tokens += t.usage->completion_tokens;
    }
    return rec;
}

std::vector<PredictionRecord> run_batch(gateway::Gateway& gw, const std::vector<Example>& examples, Mode mode,
                                        const PipelineOptions& opts, std::size_t workers) {
    std::vector<PredictionRecord> out(examples.size());
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> stop{false};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    auto work = [&] {
        while (!stop) {
            const auto i = cursor.fetch_add(1);
            if (i >= examples.size()) return;
            try {
                out[i] = run_example(gw, examples[i], mode, opts);
            } catch (...) {
                std::lock_guard lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                stop = true;
            }
        }
    };
    workers = std::max<std::size_t>(1, std::min(workers, examples.size()));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
        for (auto& th : threads) th.join();
    }
    if (fatal) std::rethrow_exception(fatal);
    return out;
}

}  // namespace tabgls::pipeline
