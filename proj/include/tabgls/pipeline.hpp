#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabgls/gateway.hpp"
#include "tabgls/prompts.hpp"
#include "tabgls/table.hpp"

namespace tabgls::pipeline {

struct ReasoningPlan {
    std::string thought;
    std::vector<std::string> target_columns;
    // Row labels, or a free-text condition passed through verbatim.
    std::variant<std::vector<std::string>, std::string> target_rows;
    // The object as the model produced it; rendered back into the SSE prompt.
    nlohmann::ordered_json raw;

    bool rows_is_condition() const noexcept { return std::holds_alternative<std::string>(target_rows); }
};

/// SchemaError naming the key if target_columns or target_rows is missing
/// or mistyped.
ReasoningPlan plan_from_json(const nlohmann::ordered_json& j, const std::string& raw_response = {});
nlohmann::ordered_json to_json(const ReasoningPlan& plan);
ReasoningPlan empty_plan();
/// JSON text placed in the {reasoning_plan} slot.
std::string render_plan(const ReasoningPlan& plan);

struct SubTableCell {
    GridIndex at;
    std::string content;

    bool operator==(const SubTableCell&) const = default;
};

struct SubTable {
    std::string plan_evaluation;
    std::vector<SubTableCell> cells;
};

/// Tolerant scan for "Row <int> Column <int>: <content>" lines; anything
/// else is skipped. Duplicate coordinates are a ParseError.
std::vector<SubTableCell> scan_cell_lines(std::string_view text);

/// SSE output: StageError without a "Sub-table:" marker,
/// EmptyEvidenceError when no cell line follows it.
SubTable parse_subtable(std::string_view text);
/// "Row i Column j: content" lines joined by newlines.
std::string render_subtable_lines(const SubTable& sub);
/// Full SSE-shaped text: plan evaluation, marker and cell lines.
std::string render_subtable(const SubTable& sub);

/// Pseudo sub-table built from a plan when SSE is skipped: column labels in
/// row 1 from column 2 on, row labels (or the condition) in column 1 from
/// row 2 on.
SubTable subtable_from_plan(const ReasoningPlan& plan);

struct FinalAnswer {
    std::string reasoning;
    std::string answer;
};

/// Every balanced {...} region that parses, in order of appearance, after
/// fence stripping and light repairs. ExtractionError if there is none.
std::vector<nlohmann::ordered_json> extract_json_all(std::string_view text);
/// The last parseable region.
nlohmann::ordered_json extract_json(std::string_view text);

/// Reasoning text plus the "answer" of the last object that has one.
/// StageError if no such object exists.
FinalAnswer parse_final_answer(std::string_view text);
/// Strings verbatim, numbers as decimal strings, other values dumped.
std::string answer_to_string(const nlohmann::ordered_json& value);

struct StageTranscript {
    Stage stage = Stage::other;
    std::string prompt;
    std::string raw_response;
    std::optional<std::variant<ReasoningPlan, SubTable, FinalAnswer>> parsed;
    std::optional<gateway::Usage> usage;
    int attempts = 0;
    bool cache_hit = false;
    std::vector<std::string> warnings;
};

nlohmann::ordered_json to_json(const StageTranscript& t);

enum class Mode { gls, gls_minus_gse, gls_minus_sse, cot, direct };
std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);

enum class EmptyEvidencePolicy { fallback_cot, fail };

struct PipelineOptions {
    std::string model_id = "default";
    double temperature = 0.0;
    int max_tokens = 1024;
    // Re-asks after the first attempt when a response does not parse.
    int max_reasks = 2;
    EmptyEvidencePolicy empty_evidence = EmptyEvidencePolicy::fallback_cot;
};

std::pair<ReasoningPlan, StageTranscript> run_gse(gateway::Gateway& gw, const std::string& image_ref,
                                                  const std::string& question, const PipelineOptions& opts = {});
std::pair<SubTable, StageTranscript> run_sse(gateway::Gateway& gw, const std::string& image_ref,
                                             const std::string& question, const ReasoningPlan& plan,
                                             const PipelineOptions& opts = {});
/// PreconditionError for an empty sub-table unless allow_empty is set.
std::pair<FinalAnswer, StageTranscript> run_egr(gateway::Gateway& gw, const std::string& image_ref,
                                                const std::string& question, const SubTable& sub,
                                                const PipelineOptions& opts = {}, bool allow_empty = false);
std::pair<FinalAnswer, StageTranscript> run_single(gateway::Gateway& gw, const std::string& image_ref,
                                                   const std::string& question, Mode mode,
                                                   const PipelineOptions& opts = {});

struct PipelineResult {
    FinalAnswer answer;
    std::vector<StageTranscript> transcripts;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

/// Runs one example. Stage errors propagate; use run_example for a record
/// that never throws on model misbehaviour.
PipelineResult run_pipeline(gateway::Gateway& gw, const std::string& image_ref, const std::string& question,
                            Mode mode, const PipelineOptions& opts = {});

struct Example {
    std::string id;
    std::string image_ref;
    std::string question;
    std::string task;
};

/// {"id", "image", "question", "task"}; id may be a number.
Example example_from_json(const nlohmann::json& j);

struct PredictionRecord {
    std::string id;
    Mode mode = Mode::gls;
    std::string answer;
    bool failed = false;
    std::string error;
    std::vector<StageTranscript> transcripts;
    gateway::Usage usage;
    bool has_usage = false;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

/// {"id", "mode", "answer", "failed", "transcripts", "usage", ...}.
/// Cache hits are left out so resumed runs serialize identically.
nlohmann::ordered_json to_json(const PredictionRecord& r);

/// Stage and data errors become a failed record; configuration and backend
/// errors propagate.
PredictionRecord run_example(gateway::Gateway& gw, const Example& ex, Mode mode, const PipelineOptions& opts = {});

/// Examples run on `workers` threads; results come back in input order.
std::vector<PredictionRecord> run_batch(gateway::Gateway& gw, const std::vector<Example>& examples, Mode mode,
                                        const PipelineOptions& opts = {}, std::size_t workers = 1);

}  // namespace tabgls::pipeline
