#include "tabgls/cli.hpp"

#include <fstream>
#include <iostream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>

#include "tabgls/datagen.hpp"
#include "tabgls/errors.hpp"
#include "tabgls/eval.hpp"
#include "tabgls/text.hpp"

namespace tabgls::cli {

namespace {

namespace pt = boost::property_tree;
using ojson = nlohmann::ordered_json;

std::string unquote(std::string s) {
    auto t = std::string(text::trim(s));
    if (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front()) {
        t = t.substr(1, t.size() - 2);
    }
    return t;
}

template <class T>
T convert(const std::string& section, const std::string& key, const std::string& raw) {
    try {
        if constexpr (std::is_same_v<T, bool>) {
            const auto v = text::to_lower(raw);
            if (v == "true" || v == "1" || v == "yes") return true;
            if (v == "false" || v == "0" || v == "no") return false;
            throw std::invalid_argument(raw);
        } else if constexpr (std::is_same_v<T, double>) {
            std::size_t pos = 0;
            const double v = std::stod(raw, &pos);
            if (pos != raw.size()) throw std::invalid_argument(raw);
            return v;
        } else {
            if (raw.empty() || raw.front() == '-') throw std::invalid_argument(raw);
            std::size_t pos = 0;
            const auto v = std::stoull(raw, &pos);
            if (pos != raw.size()) throw std::invalid_argument(raw);
            return static_cast<T>(v);
        }
    } catch (const std::logic_error&) {
        throw ConfigError(fmt::format("config [{}] {}: invalid value \"{}\"", section, key, raw));
    }
}

pipeline::EmptyEvidencePolicy policy_from_string(const std::string& s) {
    if (s == "cot") return pipeline::EmptyEvidencePolicy::fallback_cot;
    if (s == "fail") return pipeline::EmptyEvidencePolicy::fail;
    throw ConfigError(fmt::format("empty_evidence must be \"cot\" or \"fail\", got \"{}\"", s));
}

void check_config(const RunConfig& c) {
    if (c.concurrency < 1) throw ConfigError("concurrency must be at least 1");
    if (c.temperature < 0) throw ConfigError("temperature must be >= 0");
    if (c.max_tokens < 1) throw ConfigError("max_tokens must be positive");
    if (c.max_reasks < 0) throw ConfigError("max_reasks must be >= 0");
    if (c.max_skip_rate < 0 || c.max_skip_rate > 1) throw ConfigError("max_skip_rate must be within [0, 1]");
}

std::filesystem::path require(const std::optional<std::filesystem::path>& p, const char* what) {
    if (!p || p->empty()) throw ConfigError(fmt::format("{} path is required", what));
    return *p;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
    return out;
}

int cmd_datagen(const RunConfig& c, std::ostream& out) {
    if (!c.seed) throw ConfigError("datagen needs a seed (--seed or [datagen] seed)");
    datagen::DatagenOptions opts;
    opts.seed = *c.seed;
    opts.local_per_table = c.local_per_table;
    try {
        opts.placeholder = PlaceholderToken(c.placeholder);
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
    opts.max_skip_rate = c.max_skip_rate;
    opts.strict_images = c.strict_images;
    const auto dataset = require(c.dataset, "dataset (--out)");
    datagen::DatagenSummary summary;
    try {
        summary = datagen::build_dataset(require(c.corpus, "corpus"), dataset, opts);
    } catch (const DataError&) {
        out << fmt::format("manifest: {}\n", datagen::manifest_path(dataset).string());
        throw;
    }
    out << fmt::format("tables: {}  skipped: {}  instances: {}\n", summary.tables, summary.skipped, summary.instances);
    for (const auto& [kind, n] : summary.per_kind) out << fmt::format("  {:<15} {}\n", kind, n);
    out << fmt::format("dataset: {}\nmanifest: {}\n", dataset.string(), datagen::manifest_path(dataset).string());
    return kOk;
}

int cmd_infer(const RunConfig& c, std::ostream& out) {
    const auto examples_path = require(c.examples, "examples");
    const auto preds_path = require(c.predictions, "predictions (--out)");
    auto gw = make_gateway(c);

    pipeline::PipelineOptions opts;
    opts.model_id = c.model_id;
    opts.temperature = c.temperature;
    opts.max_tokens = c.max_tokens;
    opts.max_reasks = c.max_reasks;
    opts.empty_evidence = c.empty_evidence;
    // Scripted queues are consumed in call order, so keep examples sequential.
    const std::size_t workers = c.backend == gateway::BackendKind::scripted ? 1 : c.concurrency;

    std::ifstream in(examples_path);
    if (!in) throw InputError(fmt::format("cannot read examples {}", examples_path.string()));
    auto os = open_out(preds_path);

    const std::size_t chunk = std::max<std::size_t>(64, 8 * workers);
    std::vector<pipeline::Example> batch;
    std::size_t total = 0;
    std::size_t failed = 0;
    std::size_t line_no = 0;
    auto flush = [&] {
        for (const auto& rec : pipeline::run_batch(*gw, batch, c.mode, opts, workers)) {
            os << pipeline::to_json(rec).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
            ++total;
            if (rec.failed) ++failed;
        }
        os.flush();
        batch.clear();
    };
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw DataError(fmt::format("{}:{}: not valid JSON", examples_path.string(), line_no));
        try {
            batch.push_back(pipeline::example_from_json(j));
        } catch (const DataError& e) {
            throw DataError(fmt::format("{}:{}: {}", examples_path.string(), line_no, e.what()));
        }
        if (batch.size() >= chunk) flush();
    }
    flush();

    const auto log = gw->call_log();
    const auto hits = std::count_if(log.begin(), log.end(), [](const auto& r) { return r.cache_hit; });
    out << fmt::format("predictions: {}  failed: {}  model calls: {}  cache hits: {}\n", total, failed, log.size(),
                       hits);
    out << fmt::format("written: {}\n", preds_path.string());
    return kOk;
}

int cmd_eval(const RunConfig& c, std::ostream& out, const std::optional<std::filesystem::path>& text_report) {
    auto preds = eval::read_predictions(require(c.predictions, "predictions"));
    auto golds = eval::read_golds(require(c.golds, "golds"));
    const auto report = eval::aggregate(preds, golds);
    const auto txt = eval::to_text(report);
    if (c.report) {
        open_out(*c.report) << eval::to_json(report).dump(2) << '\n';
        const auto txt_path = text_report.value_or(std::filesystem::path(c.report->string() + ".txt"));
        open_out(txt_path) << txt;
    } else if (text_report) {
        open_out(*text_report) << txt;
    }
    out << txt;
    return kOk;
}

int cmd_report(const std::vector<std::string>& files, const std::optional<std::filesystem::path>& out_path,
               std::ostream& out) {
    if (files.empty()) throw ConfigError("report needs at least one predictions file");
    std::vector<eval::PredictionInput> preds;
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (const auto& f : files) {
        for (auto& p : eval::read_predictions(f)) {
            auto& [n, failed] = counts[p.mode];
            ++n;
            if (p.failed) ++failed;
            preds.push_back(std::move(p));
        }
    }
    const auto stats = eval::token_stats(preds);
    std::string txt = fmt::format("{:<15} {:>9} {:>8} {:>9} {:>24}\n", "mode", "examples", "failed", "w/ usage",
                                  "mean_completion_tokens");
    ojson j = ojson::object();
    for (const auto& [mode, nf] : counts) {
        auto it = stats.find(mode);
        const std::size_t with_usage = it == stats.end() ? 0 : it->second.n;
        const std::string mean = it == stats.end() ? "-" : fmt::format("{:.2f}", eval::to_double(it->second.mean_completion_tokens));
        txt += fmt::format("{:<15} {:>9} {:>8} {:>9} {:>24}\n", mode, nf.first, nf.second, with_usage, mean);
        j[mode] = {{"examples", nf.first},
                   {"failed", nf.second},
                   {"with_usage", with_usage},
                   {"mean_completion_tokens",
                    it == stats.end() ? ojson(nullptr) : ojson(eval::to_double(it->second.mean_completion_tokens))},
                   {"mean_completion_tokens_exact",
                    it == stats.end() ? ojson(nullptr) : ojson(eval::to_string(it->second.mean_completion_tokens))}};
    }
    if (out_path) open_out(*out_path) << j.dump(2) << '\n';
    out << txt;
    return kOk;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const PreconditionError*>(&e)) return kUsage;
    if (dynamic_cast<const BackendError*>(&e)) return kBackend;
    return kData;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("cannot read config {}: {}", path.string(), e.what()));
    }
    RunConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError(fmt::format("config key \"{}\" must live in a section", section));
        }
        for (const auto& [key, node] : body) {
            const auto v = unquote(node.data());
            const auto at = section + "." + key;
            auto path_of = [&] { return std::optional<std::filesystem::path>(v); };
            if (at == "backend.kind") c.backend = gateway::backend_kind_from_string(v);
            else if (at == "backend.endpoint") c.endpoint = v;
            else if (at == "backend.model_id") c.model_id = v;
            else if (at == "backend.api_key_env") c.api_key_env = v;
            else if (at == "backend.temperature") c.temperature = convert<double>(section, key, v);
            else if (at == "backend.max_tokens") c.max_tokens = convert<int>(section, key, v);
            else if (at == "backend.concurrency") c.concurrency = convert<std::size_t>(section, key, v);
            else if (at == "backend.cache_dir") c.cache_dir = path_of();
            else if (at == "backend.script") c.script = path_of();
            else if (at == "backend.derivations") c.derivations = path_of();
            else if (at == "pipeline.mode") c.mode = pipeline::mode_from_string(v);
            else if (at == "pipeline.empty_evidence") c.empty_evidence = policy_from_string(v);
            else if (at == "pipeline.max_reasks") c.max_reasks = convert<int>(section, key, v);
            else if (at == "datagen.seed") c.seed = convert<std::uint64_t>(section, key, v);
            else if (at == "datagen.local_per_table") c.local_per_table = convert<std::size_t>(section, key, v);
            else if (at == "datagen.placeholder") c.placeholder = v;
            else if (at == "datagen.max_skip_rate") c.max_skip_rate = convert<double>(section, key, v);
            else if (at == "datagen.strict_images") c.strict_images = convert<bool>(section, key, v);
            else if (at == "paths.corpus") c.corpus = path_of();
            else if (at == "paths.dataset") c.dataset = path_of();
            else if (at == "paths.examples") c.examples = path_of();
            else if (at == "paths.predictions") c.predictions = path_of();
            else if (at == "paths.golds") c.golds = path_of();
            else if (at == "paths.report") c.report = path_of();
            else throw ConfigError(fmt::format("unknown config key [{}] {}", section, key));
        }
    }
    check_config(c);
    return c;
}

std::unique_ptr<gateway::Gateway> make_gateway(const RunConfig& c) {
    check_config(c);
    std::unique_ptr<gateway::Backend> backend;
    switch (c.backend) {
        case gateway::BackendKind::remote: {
            if (c.endpoint.empty()) throw ConfigError("remote backend needs an endpoint");
            gateway::RemoteOptions o;
            o.endpoint = c.endpoint;
            o.api_key_env = c.api_key_env;
            backend = std::make_unique<gateway::RemoteBackend>(o);
            break;
        }
        case gateway::BackendKind::scripted:
            backend = gateway::ScriptedBackend::from_file(require(c.script, "scripted backend script"));
            break;
        case gateway::BackendKind::oracle:
            backend = gateway::OracleBackend::from_file(require(c.derivations, "oracle derivations"));
            break;
    }
    gateway::GatewayOptions go;
    go.concurrency = c.concurrency;
    go.cache_dir = c.cache_dir;
    return std::make_unique<gateway::Gateway>(std::move(backend), go);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Table structure/content alignment data and structure-guided table reasoning"};
    app.require_subcommand(1);
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    std::string config_path;
    auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config_path, "INI-style run configuration"); };

    // Flag storage; only flags that were given override the config file.
    std::string corpus, dataset, examples, predictions, golds, report, text_report, placeholder, mode, backend_name,
        endpoint, model_id, api_key_env, cache_dir, script, derivations, empty_evidence;
    std::uint64_t seed = 0;
    std::size_t local_per_table = 1, concurrency = 8;
    double max_skip_rate = 0.01, temperature = 0.0;
    int max_tokens = 1024, max_reasks = 2;
    std::vector<std::string> report_files;
    std::string report_out;

    auto* dg = app.add_subcommand("datagen", "Build a structure/content alignment dataset from a corpus manifest");
    add_config(dg);
    auto* o_corpus = dg->add_option("--corpus", corpus, "corpus manifest JSONL");
    auto* o_dataset = dg->add_option("--out", dataset, "output dataset JSONL");
    auto* o_seed = dg->add_option("--seed", seed, "random seed");
    auto* o_lpt = dg->add_option("--local-per-table", local_per_table, "local instances per table")->check(CLI::PositiveNumber);
    auto* o_ph = dg->add_option("--placeholder", placeholder, "anonymization placeholder");
    auto* o_strict = dg->add_flag("--strict-images", "skip entries whose image file does not exist");
    auto* o_skip = dg->add_option("--max-skip-rate", max_skip_rate, "fail when more entries are skipped")->check(CLI::Range(0.0, 1.0));

    auto* inf = app.add_subcommand("infer", "Run the reasoning pipeline over an evaluation set");
    add_config(inf);
    auto* o_examples = inf->add_option("--examples", examples, "evaluation JSONL with id, image, question, task");
    auto* o_preds_out = inf->add_option("--out", predictions, "predictions JSONL");
    auto* o_mode = inf->add_option("--mode", mode, "gls, gls_minus_gse, gls_minus_sse, cot or direct");
    auto* o_backend = inf->add_option("--backend", backend_name, "remote, scripted or oracle");
    auto* o_endpoint = inf->add_option("--endpoint", endpoint, "chat-completions URL");
    auto* o_model = inf->add_option("--model", model_id, "model id");
    auto* o_keyenv = inf->add_option("--api-key-env", api_key_env, "environment variable holding the API key");
    auto* o_temp = inf->add_option("--temperature", temperature);
    auto* o_maxtok = inf->add_option("--max-tokens", max_tokens);
    auto* o_conc = inf->add_option("--concurrency", concurrency, "requests in flight")->check(CLI::PositiveNumber);
    auto* o_cache = inf->add_option("--cache-dir", cache_dir, "response cache directory");
    auto* o_script = inf->add_option("--script", script, "scripted backend replies (JSON)");
    auto* o_deriv = inf->add_option("--derivations", derivations, "oracle backend gold derivations (JSONL)");
    auto* o_empty = inf->add_option("--empty-evidence", empty_evidence, "cot or fail");
    auto* o_reasks = inf->add_option("--max-reasks", max_reasks);

    auto* ev = app.add_subcommand("eval", "Score predictions against gold records");
    add_config(ev);
    auto* o_preds_in = ev->add_option("--predictions", predictions, "predictions JSONL");
    auto* o_golds = ev->add_option("--golds", golds, "gold JSONL");
    auto* o_report = ev->add_option("--report", report, "JSON report path (text goes next to it)");
    ev->add_option("--text-report", text_report, "plain-text report path");

    auto* rp = app.add_subcommand("report", "Summarize predictions per mode, including token usage");
    rp->add_option("--predictions", report_files, "predictions JSONL (repeatable)")->required();
    rp->add_option("--out", report_out, "write the summary as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    sink->set_pattern("[%l] %v");
    auto logger = std::make_shared<spdlog::logger>("tabgls", sink);
    logger->set_level(spdlog::level::from_str(log_level));
    auto previous = spdlog::default_logger();
    spdlog::set_default_logger(logger);
    struct Restore {
        std::shared_ptr<spdlog::logger> logger;
        ~Restore() { spdlog::set_default_logger(logger); }
    } restore{previous};

    try {
        RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
        auto given = [](const CLI::Option* o) { return o->count() > 0; };
        if (given(o_corpus)) c.corpus = corpus;
        if (given(o_dataset)) c.dataset = dataset;
        if (given(o_seed)) c.seed = seed;
        if (given(o_lpt)) c.local_per_table = local_per_table;
        if (given(o_ph)) c.placeholder = placeholder;
        if (given(o_strict)) c.strict_images = true;
        if (given(o_skip)) c.max_skip_rate = max_skip_rate;
        if (given(o_examples)) c.examples = examples;
        if (given(o_preds_out) || given(o_preds_in)) c.predictions = predictions;
        if (given(o_mode)) c.mode = pipeline::mode_from_string(mode);
        if (given(o_backend)) c.backend = gateway::backend_kind_from_string(backend_name);
        if (given(o_endpoint)) c.endpoint = endpoint;
        if (given(o_model)) c.model_id = model_id;
        if (given(o_keyenv)) c.api_key_env = api_key_env;
        if (given(o_temp)) c.temperature = temperature;
        if (given(o_maxtok)) c.max_tokens = max_tokens;
        if (given(o_conc)) c.concurrency = concurrency;
        if (given(o_cache)) c.cache_dir = cache_dir;
        if (given(o_script)) c.script = script;
        if (given(o_deriv)) c.derivations = derivations;
        if (given(o_empty)) c.empty_evidence = policy_from_string(empty_evidence);
        if (given(o_reasks)) c.max_reasks = max_reasks;
        if (given(o_golds)) c.golds = golds;
        if (given(o_report)) c.report = report;
        check_config(c);

        if (dg->parsed()) return cmd_datagen(c, out);
        if (inf->parsed()) return cmd_infer(c, out);
        if (ev->parsed()) {
            return cmd_eval(c, out, text_report.empty() ? std::nullopt : std::optional<std::filesystem::path>(text_report));
        }
        return cmd_report(report_files,
                          report_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(report_out), out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace tabgls::cli
