#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

namespace tabgls::eval {

using Rational = boost::multiprecision::number<
    boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<>>,
    boost::multiprecision::et_off>;

/// "num/den" in lowest terms, or just "num" for integers.
std::string to_string(const Rational& r);
double to_double(const Rational& r);

enum class Task { tsd, tce, tcl, mcd, rce_row, rce_col, tqa, tfv };
std::string_view to_string(Task t);
Task task_from_string(std::string_view s);

struct NormalizedAnswer {
    std::string text;
    bool had_percent = false;
    bool had_currency = false;
};

/// Lowercase, trim, collapse whitespace, strip surrounding quotes and a
/// trailing period, canonicalize numbers ("1,234.0" -> "1234"), drop a
/// leading "$" or a leading or trailing "%" from numbers.
NormalizedAnswer normalize_answer_detailed(std::string_view raw);
std::string normalize_answer(std::string_view raw);

struct TsdScore {
    int row = 0;
    int col = 0;
};

TsdScore eval_tsd(std::optional<std::pair<int, int>> pred, std::pair<int, int> gold);

/// Position-aligned; positions past the end of pred count as wrong.
Rational eval_cell_accuracy(const std::vector<std::string>& pred, const std::vector<std::string>& gold);

struct F1Score {
    Rational precision;
    Rational recall;
    Rational f1;
};

/// Set semantics over normalized items.
F1Score eval_cell_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold);

/// Label classes for fact verification; labels outside both sets compare
/// as normalized text.
struct TfvLabels {
    std::set<std::string> supports{"entailed", "entailment", "true", "yes", "supports", "supported", "1"};
    std::set<std::string> refutes{"refuted", "refutes", "false", "no", "not entailed", "contradiction", "0"};

    std::string canonical(std::string_view label) const;
};

/// Single gold: normalized equality. Several golds: the prediction is split
/// into items and the normalized sets must match.
int eval_qa(std::string_view pred, const std::vector<std::string>& gold);
int eval_tfv(std::string_view pred, std::string_view gold, const TfvLabels& labels = {});

// Parsers turning a free-form answer into the payload a task expects.
std::optional<std::pair<int, int>> parse_tsd_prediction(std::string_view answer);
std::vector<std::string> parse_list_prediction(std::string_view answer);
/// Grid indices rendered as "r,c".
std::vector<std::string> parse_index_prediction(std::string_view answer);
/// Merged regions rendered as "r,c,rs,cs".
std::vector<std::string> parse_region_prediction(std::string_view answer);
/// Items of a multi-answer prediction.
std::vector<std::string> split_answer_items(std::string_view answer);

struct GoldRecord {
    std::string id;
    Task task = Task::tqa;
    nlohmann::json gold;
};

/// {"id", "task", "gold"}; DataError if the payload shape does not match
/// the task.
GoldRecord gold_from_json(const nlohmann::json& j);

struct PredictionInput {
    std::string id;
    std::string mode;
    std::string answer;
    bool failed = false;
    std::optional<std::int64_t> completion_tokens;
};

PredictionInput prediction_from_json(const nlohmann::json& j);

struct TaskReport {
    std::size_t n = 0;
    std::size_t failed = 0;
    // Named sample-weighted means, e.g. accuracy, f1, row_accuracy.
    std::map<std::string, Rational> metrics;
    Rational primary;
};

struct TokenStat {
    std::size_t n = 0;
    Rational mean_completion_tokens;
};

struct MetricReport {
    std::map<Task, TaskReport> per_task;
    Rational overall;
    std::map<std::string, TokenStat> token_stats;
};

struct EvalOptions {
    TfvLabels tfv_labels;
};

/// ReconciliationError listing missing and extra ids.
MetricReport aggregate(const std::vector<PredictionInput>& preds, const std::vector<GoldRecord>& golds,
                       const EvalOptions& options = {});

/// Mean completion tokens per mode over predictions that carry usage.
std::map<std::string, TokenStat> token_stats(const std::vector<PredictionInput>& preds);

nlohmann::ordered_json to_json(const MetricReport& report);
std::string to_text(const MetricReport& report);

std::vector<PredictionInput> read_predictions(const std::filesystem::path& path);
std::vector<GoldRecord> read_golds(const std::filesystem::path& path);

}  // namespace tabgls::eval
