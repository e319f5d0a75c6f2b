#include "tabgls/datagen.hpp"

#include <fstream>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "tabgls/errors.hpp"
#include "tabgls/text.hpp"

namespace tabgls::datagen {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::array<std::string_view, TemplateBank::kSize> kGlobalTemplates{
    "<image>\nDescribe the table shown in the image in the following format.\nThe table has [m] rows and [n] columns.\nRow 1 Column 1: [Content]\nRow 1 Column 2: [Content]\n...\nRow m Column n: [Content]\n",
    "<image>\nDescribe the structure and content of the table in the image, listing each cell's information in the specified format.\nThe table has [m] rows and [n] columns.\nRow 1 Column 1: [Content]\nRow 1 Column 2: [Content]\n...\nRow m Column n: [Content]\n",
    "<image>\nProvide a thorough description of the table depicted in the image, including its dimensions and the content of each cell, following the format below.\nThe table has [m] rows and [n] columns.\nRow 1 Column 1: [Content]\nRow 1 Column 2: [Content]\n...\nRow m Column n: [Content]\n",
    "<image>\nExamine the table in the image and produce a comprehensive description that includes the number of rows and columns, as well as the content of each cell, formatted as shown.\nThe table has [m] rows and [n] columns.\nRow 1 Column 1: [Content]\nRow 1 Column 2: [Content]\n...\nRow m Column n: [Content]\n",
    "<image>\nTransform the table shown in the image into a detailed textual format, specifying the number of rows and columns, along with the content of each cell as illustrated below.\nThe table has [m] rows and [n] columns.\nRow 1 Column 1: [Content]\nRow 1 Column 2: [Content]\n...\nRow m Column n: [Content]\n",
    "<image>\nConvert the table displayed in the image into a detailed text description, adhering to the format provided below.\nThe table has [m] rows and [n] columns.\nRow 1 Column 1: [Content]\nRow 1 Column 2: [Content]\n...\nRow m Column n: [Content]\n",
    "<image>\nGenerate a structured textual representation of the table in the image, detailing each cell's content in the specified format.\nThe table has [m] rows and [n] columns.\nRow 1 Column 1: [Content]\nRow 1 Column 2: [Content]\n...\nRow m Column n: [Content]\n",
    "<image>\nAnalyze the table in the image and output a detailed textual description listing every cell in the following format.\nThe table has [m] rows and [n] columns.\nRow 1 Column 1: [Content]\nRow 1 Column 2: [Content]\n...\nRow m Column n: [Content]\n",
    "<image>\nRead the table content from the image and reconstruct its structure in text form as shown below.\nThe table has [m] rows and [n] columns.\nRow 1 Column 1: [Content]\nRow 1 Column 2: [Content]\n...\nRow m Column n: [Content]\n",
    "<image>\nProvide a detailed description of the table in the image, including the number of rows and columns, as well as the content of each cell, following the format below.\nThe table has [m] rows and [n] columns.\nRow 1 Column 1: [Content]\nRow 1 Column 2: [Content]\n...\nRow m Column n: [Content]\n",
};

constexpr std::array<std::string_view, TemplateBank::kSize> kLocalTemplates{
    "What is the exact value located at Row {R} and Column {C}?",
    "Retrieve the content of the cell at coordinate Row {R}, Column {C}.",
    "Perform a lookup for the data point at index Row {R}, Column {C}.",
    "Identify the specific data found in cell Row {R}, Column {C}.",
    "State the information present at Row index {R} and Column index {C}.",
    "Read the exact data from the cell defined by Row {R} and Column {C}.",
    "Query the table for the value at the coordinate (Row {R}, Column {C}).",
    "In the grid, what is present at the intersection of Row {R} and Column {C}?",
    "Return the single data point located at Row {R}, Column {C}.",
    "Content of the cell with indices Row {R}, Column {C}.",
};

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
    return s;
}

ojson base_meta(const Table& table) { return ojson{{"format", std::string(to_string(table.source_format()))}}; }

std::string require_string(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw DataError(fmt::format("corpus entry: \"{}\" must be a string", key));
    return it->get<std::string>();
}

}  // namespace

std::string_view to_string(InstanceKind k) {
    switch (k) {
        case InstanceKind::structure: return "structure";
        case InstanceKind::content_global: return "content_global";
        case InstanceKind::content_local: return "content_local";
    }
    return "unknown";
}

nlohmann::ordered_json to_json(const AlignmentInstance& inst) {
    return ojson{{"kind", std::string(to_string(inst.kind))},
                 {"instruction", inst.instruction},
                 {"image", inst.image_ref},
                 {"target", inst.target},
                 {"meta", inst.meta}};
}

TemplateBank::TemplateBank() : global_(kGlobalTemplates), local_(kLocalTemplates) {}

const TemplateBank& TemplateBank::standard() {
    static const TemplateBank bank;
    return bank;
}

std::string TemplateBank::structure_suffix(const PlaceholderToken& placeholder) const {
    return fmt::format("Replace all the table contents with '{}', keeping the table structure intact.",
                       placeholder.token());
}

std::string_view TemplateBank::global_template(std::size_t index) const {
    if (index >= kSize) throw RangeError(fmt::format("no global template #{} (bank has {})", index, kSize));
    return global_[index];
}

std::string TemplateBank::local_instruction(std::size_t index, GridIndex at) const {
    if (index >= kSize) throw RangeError(fmt::format("no local template #{} (bank has {})", index, kSize));
    return replace_all(replace_all(std::string(local_[index]), "{R}", std::to_string(at.row)), "{C}",
                       std::to_string(at.col));
}

std::string global_description(const Table& table) {
    std::string out = fmt::format("The table has {} rows and {} columns", table.n_rows(), table.n_cols());
    for (const auto& c : table.cells()) {
        out += fmt::format("\nRow {} Column {}: {}", c.anchor_row, c.anchor_col, c.content);
    }
    return out;
}

std::string local_target(const Table& table, GridIndex at) {
    return fmt::format("Row {} Column {}: {}", at.row, at.col, table.cell_at(at).content);
}

AlignmentInstance gen_structure(const Table& table, SourceFormat format, const std::string& base_query,
                                const std::string& image_ref, const PlaceholderToken& placeholder) {
    if (image_ref.empty()) throw PreconditionError("image reference must not be empty");
    AlignmentInstance inst;
    inst.kind = InstanceKind::structure;
    const auto suffix = TemplateBank::standard().structure_suffix(placeholder);
    const auto query = text::trim(base_query);
    inst.instruction = query.empty() ? suffix : std::string(query) + " " + suffix;
    inst.image_ref = image_ref;
    inst.target = anonymize(table, format, placeholder).text;
    inst.meta = ojson{{"format", std::string(to_string(format))}};
    return inst;
}

AlignmentInstance gen_structure(const TableText& table_text, const std::string& base_query,
                                const std::string& image_ref, const PlaceholderToken& placeholder) {
    return gen_structure(parse(table_text), table_text.format, base_query, image_ref, placeholder);
}

AlignmentInstance gen_global(const Table& table, const std::string& image_ref, SeededRng& rng) {
    if (image_ref.empty()) throw PreconditionError("image reference must not be empty");
    const auto& bank = TemplateBank::standard();
    const auto choice = static_cast<std::size_t>(rng.below(TemplateBank::kSize));
    AlignmentInstance inst;
    inst.kind = InstanceKind::content_global;
    inst.instruction = std::string(bank.global_template(choice));
    inst.image_ref = image_ref;
    inst.target = global_description(table);
    inst.meta = base_meta(table);
    inst.meta["template"] = choice;
    return inst;
}

std::vector<AlignmentInstance> gen_local_many(const Table& table, const std::string& image_ref, SeededRng& rng,
                                              std::size_t k) {
    if (image_ref.empty()) throw PreconditionError("image reference must not be empty");
    const auto& bank = TemplateBank::standard();
    const auto& cells = table.cells();
    std::vector<std::size_t> pool(cells.size());
    std::iota(pool.begin(), pool.end(), 0);
    std::size_t remaining = pool.size();

    std::vector<AlignmentInstance> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t ordinal;
        if (remaining > 0) {
            // Partial Fisher-Yates: draw without replacement while anchors last.
            const auto j = static_cast<std::size_t>(rng.below(remaining));
            ordinal = pool[j];
            std::swap(pool[j], pool[remaining - 1]);
            --remaining;
        } else {
            ordinal = static_cast<std::size_t>(rng.below(cells.size()));
        }
        const GridIndex at{cells[ordinal].anchor_row, cells[ordinal].anchor_col};
        const auto choice = static_cast<std::size_t>(rng.below(TemplateBank::kSize));
        AlignmentInstance inst;
        inst.kind = InstanceKind::content_local;
        inst.instruction = bank.local_instruction(choice, at);
        inst.image_ref = image_ref;
        inst.target = local_target(table, at);
        inst.meta = base_meta(table);
        inst.meta["template"] = choice;
        inst.meta["cell"] = {at.row, at.col};
        out.push_back(std::move(inst));
    }
    return out;
}

AlignmentInstance gen_local(const Table& table, const std::string& image_ref, SeededRng& rng) {
    return std::move(gen_local_many(table, image_ref, rng, 1).front());
}

CorpusEntry parse_corpus_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(fmt::format("corpus entry is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) throw DataError("corpus entry must be a JSON object");
    auto table = j.find("table");
    if (table == j.end() || !table->is_object()) throw DataError("corpus entry: \"table\" must be an object");
    CorpusEntry e;
    try {
        e.table.format = source_format_from_string(require_string(*table, "format"));
    } catch (const PreconditionError& err) {
        throw DataError(fmt::format("corpus entry: {}", err.what()));
    }
    auto text = table->find("text");
    if (text == table->end()) throw DataError("corpus entry: \"table.text\" is missing");
    // canonical-json tables may be embedded as objects rather than strings.
    e.table.text = text->is_string() ? text->get<std::string>() : text->dump();
    e.image_ref = require_string(j, "image");
    if (e.image_ref.empty()) throw DataError("corpus entry: \"image\" must not be empty");
    e.base_query = j.contains("base_query") ? require_string(j, "base_query") : std::string();
    e.source = j.contains("source") ? require_string(j, "source") : std::string("unknown");
    if (auto id = j.find("id"); id != j.end()) e.id = id->is_string() ? id->get<std::string>() : id->dump();
    return e;
}

nlohmann::ordered_json to_json(const CorpusEntry& e) {
    ojson j{{"table", {{"format", std::string(to_string(e.table.format))}, {"text", e.table.text}}},
            {"image", e.image_ref},
            {"base_query", e.base_query},
            {"source", e.source}};
    if (e.id) j["id"] = *e.id;
    return j;
}

nlohmann::ordered_json to_json(const DatagenSummary& s, const DatagenOptions& options) {
    ojson per_source = ojson::object();
    for (const auto& [name, counts] : s.per_source) {
        per_source[name] = {{"tables", counts.tables}, {"samples", counts.samples}};
    }
    ojson per_kind = ojson::object();
    for (auto k : {InstanceKind::structure, InstanceKind::content_global, InstanceKind::content_local}) {
        auto it = s.per_kind.find(std::string(to_string(k)));
        per_kind[std::string(to_string(k))] = it == s.per_kind.end() ? 0 : it->second;
    }
    return ojson{{"seed", options.seed},
                 {"local_per_table", options.local_per_table},
                 {"placeholder", options.placeholder.token()},
                 {"entries", s.entries},
                 {"tables", s.tables},
                 {"skipped", s.skipped},
                 {"instances", s.instances},
                 {"per_kind", per_kind},
                 {"per_source", per_source}};
}

DatagenSummary build_dataset(std::istream& corpus, std::ostream& out, const DatagenOptions& options) {
    DatagenSummary summary;
    for (auto k : {InstanceKind::structure, InstanceKind::content_global, InstanceKind::content_local}) {
        summary.per_kind[std::string(to_string(k))] = 0;
    }
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t ordinal = 0;
    while (std::getline(corpus, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::uint64_t this_ordinal = ordinal++;
        ++summary.entries;
        std::vector<AlignmentInstance> instances;
        std::string source = "unknown";
        try {
            auto entry = parse_corpus_line(line);
            source = entry.source;
            if (options.strict_images && !std::filesystem::exists(entry.image_ref)) {
                throw InputError(fmt::format("image not found: {}", entry.image_ref));
            }
            const Table table = parse(entry.table);
            const std::string table_id = entry.id.value_or(std::to_string(this_ordinal));
            SeededRng rng(sub_seed(options.seed, this_ordinal));
            instances.push_back(gen_structure(table, entry.table.format, entry.base_query, entry.image_ref,
                                              options.placeholder));
            instances.push_back(gen_global(table, entry.image_ref, rng));
            for (auto& inst : gen_local_many(table, entry.image_ref, rng, options.local_per_table)) {
                instances.push_back(std::move(inst));
            }
            for (auto& inst : instances) {
                ojson meta{{"source", entry.source}, {"table_id", table_id}};
                meta.update(inst.meta);
                inst.meta = std::move(meta);
            }
        } catch (const Error& e) {
            ++summary.skipped;
            summary.skip_reasons.push_back(fmt::format("line {}: {}", line_no, e.what()));
            spdlog::warn("datagen: skipping corpus line {}: {}", line_no, e.what());
            continue;
        }
        ++summary.tables;
        auto& src = summary.per_source[source];
        ++src.tables;
        for (const auto& inst : instances) {
            out << to_json(inst).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
            ++summary.per_kind[std::string(to_string(inst.kind))];
            ++summary.instances;
            ++src.samples;
        }
    }
    return summary;
}

std::filesystem::path manifest_path(const std::filesystem::path& out) {
    return std::filesystem::path(out.string() + ".manifest.json");
}

DatagenSummary build_dataset(const std::filesystem::path& corpus, const std::filesystem::path& out,
                             const DatagenOptions& options) {
    std::ifstream in(corpus, std::ios::binary);
    if (!in) throw InputError(fmt::format("cannot read corpus manifest {}", corpus.string()));
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream os(out, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError(fmt::format("cannot write dataset {}", out.string()));
    auto summary = build_dataset(in, os, options);
    os.close();
    std::ofstream ms(manifest_path(out), std::ios::binary | std::ios::trunc);
    ms << to_json(summary, options).dump(2) << '\n';
    ms.close();
    if (summary.skip_rate() > options.max_skip_rate) {
        throw DataError(fmt::format("skipped {} of {} corpus entries ({:.2f}%), above the {:.2f}% limit",
                                    summary.skipped, summary.entries, 100.0 * summary.skip_rate(),
                                    100.0 * options.max_skip_rate));
    }
    return summary;
}

}  // namespace tabgls::datagen
