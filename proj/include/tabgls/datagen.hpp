#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabgls/codec.hpp"
#include "tabgls/rng.hpp"
#include "tabgls/table.hpp"

namespace tabgls::datagen {

enum class InstanceKind { structure, content_global, content_local };

std::string_view to_string(InstanceKind k);

/// One (instruction, image, target) training triple.
struct AlignmentInstance {
    InstanceKind kind = InstanceKind::structure;
    std::string instruction;
    std::string image_ref;
    std::string target;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

/// JSONL record: {"kind", "instruction", "image", "target", "meta"}.
nlohmann::ordered_json to_json(const AlignmentInstance& inst);

/// The fixed instruction banks used for content alignment. Global templates
/// carry the "<image>" token; local templates carry the {R} and {C} slots.
class TemplateBank {
public:
    static constexpr std::size_t kSize = 10;

    static const TemplateBank& standard();

    const std::array<std::string_view, kSize>& global_templates() const noexcept { return global_; }
    const std::array<std::string_view, kSize>& local_templates() const noexcept { return local_; }

    /// Instruction suffix for structure alignment naming the placeholder.
    std::string structure_suffix(const PlaceholderToken& placeholder = {}) const;

    std::string_view global_template(std::size_t index) const;
    /// Local template with {R} and {C} substituted.
    std::string local_instruction(std::size_t index, GridIndex at) const;

private:
    TemplateBank();

    std::array<std::string_view, kSize> global_;
    std::array<std::string_view, kSize> local_;
};

/// "The table has m rows and n columns" followed by one
/// "Row i Column j: content" line per anchor cell, row-major.
std::string global_description(const Table& table);

std::string local_target(const Table& table, GridIndex at);

AlignmentInstance gen_structure(const TableText& table_text, const std::string& base_query,
                                const std::string& image_ref, const PlaceholderToken& placeholder = {});
/// Same, for an already parsed table (anonymized in `format`).
AlignmentInstance gen_structure(const Table& table, SourceFormat format, const std::string& base_query,
                                const std::string& image_ref, const PlaceholderToken& placeholder = {});

AlignmentInstance gen_global(const Table& table, const std::string& image_ref, SeededRng& rng);

AlignmentInstance gen_local(const Table& table, const std::string& image_ref, SeededRng& rng);

/// k local instances; anchors are distinct while k does not exceed the
/// number of anchor cells.
std::vector<AlignmentInstance> gen_local_many(const Table& table, const std::string& image_ref,
                                              SeededRng& rng, std::size_t k);

/// One manifest line: {"table": {"format", "text"}, "image", "base_query",
/// "source", optional "id"}.
struct CorpusEntry {
    TableText table;
    std::string image_ref;
    std::string base_query;
    std::string source;
    std::optional<std::string> id;
};

CorpusEntry parse_corpus_line(const std::string& line);
nlohmann::ordered_json to_json(const CorpusEntry& entry);

struct DatagenOptions {
    std::uint64_t seed = 0;
    std::size_t local_per_table = 1;
    PlaceholderToken placeholder;
    double max_skip_rate = 0.01;
    bool strict_images = false;
};

struct SourceCounts {
    std::size_t tables = 0;
    std::size_t samples = 0;
};

struct DatagenSummary {
    std::size_t entries = 0;
    std::size_t tables = 0;
    std::size_t skipped = 0;
    std::size_t instances = 0;
    std::map<std::string, std::size_t> per_kind;
    std::map<std::string, SourceCounts> per_source;
    std::vector<std::string> skip_reasons;

    double skip_rate() const noexcept {
        return entries == 0 ? 0.0 : static_cast<double>(skipped) / static_cast<double>(entries);
    }
};

nlohmann::ordered_json to_json(const DatagenSummary& s, const DatagenOptions& options);

/// Streams the corpus manifest into alignment JSONL, one structure, one
/// global and local_per_table local instances per table, in corpus order.
/// Unparseable entries are logged and skipped.
DatagenSummary build_dataset(std::istream& corpus, std::ostream& out, const DatagenOptions& options);

/// File front end: writes `out` and `<out>.manifest.json`, then throws
/// DataError if the skip rate exceeds options.max_skip_rate.
DatagenSummary build_dataset(const std::filesystem::path& corpus, const std::filesystem::path& out,
                             const DatagenOptions& options);

std::filesystem::path manifest_path(const std::filesystem::path& out);

}  // namespace tabgls::datagen
