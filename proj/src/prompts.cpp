#include "tabgls/prompts.hpp"

#include <fmt/format.h>

#include "tabgls/errors.hpp"
#include "tabgls/text.hpp"

namespace tabgls {

namespace {

constexpr std::string_view kGse = R"tpl(You are given a table image and a question.
Your task is to analyze the layout and headers of the table to locate the information 
needed to answer the given question. 

Please output in the following JSON format:
{{
    "thought": "Briefly explain your reasoning on which columns/rows are needed.",
    "target_columns": ["List the exact column headers required"],
    "target_rows": ["List the target row labels required"] or "Describe the condition 
    to filter rows (e.g., 'Year is 2023 or 2024')",
}}

Question: 
{question})tpl";

constexpr std::string_view kSse = R"tpl(You are given a table image, a question and a reasoning plan with target rows and 
columns.
First, evaluate whether the given reasoning plan is correct and sufficient for 
answering the question. If the plan is incorrect or incomplete, revise it to obtain
a correct reasoning plan.
Then, based on the correct reasoning plan, extract the sub-table that is necessary to 
answer the question.

Output strictly in the following format:
Plan Evaluation: "brief explanation of your judgment"
Sub-table:
Row m Column n: [Content]
...

Reasoning Plan:
{reasoning_plan}

Question: 
{question})tpl";

constexpr std::string_view kEgr = R"tpl(You are given a table image, a question and a sub-table.
First, let's think step by step based on the given information.
Then provide the final concise answer in the JSON format {{\"answer\": \"<YOUR 
ANSWER>\"}}.

Output in the following format:
Reasoning: "think step by step to answer the question"
{{\"answer\": \"<YOUR ANSWER>\"}}

Sub-table:
{subtable}

Question: 
{question})tpl";

constexpr std::string_view kQuestionMarker = "Question: \n";

bool starts_with_line(std::string_view prompt, std::string_view tmpl) {
    const auto first = tmpl.substr(0, tmpl.find('\n') + 1);
    return prompt.substr(0, first.size()) == first;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::gse: return "gse";
        case Stage::sse: return "sse";
        case Stage::egr: return "egr";
        case Stage::cot: return "cot";
        case Stage::direct: return "direct";
        case Stage::other: return "other";
    }
    return "other";
}

Stage stage_from_string(std::string_view s) {
    for (auto st : {Stage::gse, Stage::sse, Stage::egr, Stage::cot, Stage::direct, Stage::other}) {
        if (to_string(st) == s) return st;
    }
    throw PreconditionError(fmt::format("unknown stage \"{}\"", s));
}

namespace prompts {

const std::string_view kCotSuffix =
    "Think step by step and output the final answer in the JSON format {\"answer\": \"<YOUR ANSWER>\"}";
const std::string_view kDirectSuffix =
    "Provide the answer in the JSON format {\"answer\": \"<YOUR ANSWER>\"} directly without any other explanation.";

std::string_view gse_template() { return kGse; }
std::string_view sse_template() { return kSse; }
std::string_view egr_template() { return kEgr; }

std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& slots) {
    std::string out;
    out.reserve(tmpl.size() + 256);
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        const char c = tmpl[i];
        if (c == '{') {
            if (i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
                out += '{';
                ++i;
                continue;
            }
            const auto close = tmpl.find('}', i);
            if (close == std::string_view::npos) throw PreconditionError("template: unmatched '{'");
            const auto name = tmpl.substr(i + 1, close - i - 1);
            auto it = slots.find(name);
            if (it == slots.end()) throw PreconditionError(fmt::format("template: no value for slot {{{}}}", name));
            out += it->second;
            i = close;
        } else if (c == '}') {
            if (i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
                out += '}';
                ++i;
                continue;
            }
            throw PreconditionError("template: single '}' outside a slot");
        } else {
            out += c;
        }
    }
    return out;
}

namespace {

void require_question(std::string_view question) {
    if (text::trim(question).empty()) throw PreconditionError("question must not be empty");
}

}  // namespace

std::string render_gse(std::string_view question) {
    require_question(question);
    return render(kGse, {{"question", std::string(question)}});
}

std::string render_sse(std::string_view question, std::string_view reasoning_plan) {
    require_question(question);
    return render(kSse, {{"question", std::string(question)}, {"reasoning_plan", std::string(reasoning_plan)}});
}

std::string render_egr(std::string_view question, std::string_view subtable) {
    require_question(question);
    return render(kEgr, {{"question", std::string(question)}, {"subtable", std::string(subtable)}});
}

std::string render_cot(std::string_view question) {
    require_question(question);
    return fmt::format("{} {}", question, kCotSuffix);
}

std::string render_direct(std::string_view question) {
    require_question(question);
    return fmt::format("{} {}", question, kDirectSuffix);
}

Stage classify(std::string_view prompt) {
    if (starts_with_line(prompt, kGse)) return Stage::gse;
    if (starts_with_line(prompt, kSse)) return Stage::sse;
    if (starts_with_line(prompt, kEgr)) return Stage::egr;
    if (ends_with(prompt, kCotSuffix)) return Stage::cot;
    if (ends_with(prompt, kDirectSuffix)) return Stage::direct;
    return Stage::other;
}

std::string extract_question(std::string_view prompt) {
    switch (classify(prompt)) {
        case Stage::gse:
        case Stage::sse:
        case Stage::egr: {
            const auto pos = prompt.rfind(kQuestionMarker);
            if (pos == std::string_view::npos) return std::string(prompt);
            return std::string(prompt.substr(pos + kQuestionMarker.size()));
        }
        case Stage::cot: return std::string(prompt.substr(0, prompt.size() - kCotSuffix.size() - 1));
        case Stage::direct: return std::string(prompt.substr(0, prompt.size() - kDirectSuffix.size() - 1));
        case Stage::other: break;
    }
    return std::string(prompt);
}

}  // namespace prompts
}  // namespace tabgls
