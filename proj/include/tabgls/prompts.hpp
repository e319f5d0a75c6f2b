#pragma once

#include <map>
#include <string>
#include <string_view>

namespace tabgls {

enum class Stage { gse, sse, egr, cot, direct, other };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

namespace prompts {

// Raw templates. Slots use str.format syntax: {name}, with {{ and }} as
// literal braces.
std::string_view gse_template();
std::string_view sse_template();
std::string_view egr_template();

extern const std::string_view kCotSuffix;
extern const std::string_view kDirectSuffix;

/// Substitutes every {slot}; unknown slots and stray braces are
/// PreconditionErrors.
std::string render(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& slots);

std::string render_gse(std::string_view question);
std::string render_sse(std::string_view question, std::string_view reasoning_plan);
std::string render_egr(std::string_view question, std::string_view subtable);
std::string render_cot(std::string_view question);
std::string render_direct(std::string_view question);

/// Which stage produced a prompt, recognised from the template wording.
Stage classify(std::string_view prompt);

/// The question slot of a rendered prompt of any stage.
std::string extract_question(std::string_view prompt);

}  // namespace prompts
}  // namespace tabgls
