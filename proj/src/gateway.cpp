#include "tabgls/gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "tabgls/errors.hpp"
#include "tabgls/pipeline.hpp"
#include "tabgls/text.hpp"

namespace tabgls::gateway {

using ojson = nlohmann::ordered_json;

namespace {

std::string read_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(fmt::format("cannot read image {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in && !in.eof()) throw InputError(fmt::format("cannot read image {}", path.string()));
    return ss.str();
}

std::string mime_for(const std::filesystem::path& path) {
    auto ext = text::to_lower(path.extension().string());
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    return "image/png";
}

std::int64_t word_count(std::string_view s) {
    std::int64_t n = 0;
    bool in_word = false;
    for (char c : s) {
        const bool space = text::is_space(c);
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::string format_number(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) {
        return std::to_string(static_cast<std::int64_t>(v));
    }
    return fmt::format("{}", v);
}

std::optional<double> to_number(std::string_view s) {
    std::string cleaned;
    for (char c : text::trim(s)) {
        if (c != ',' && c != '$' && c != '%') cleaned += c;
    }
    if (cleaned.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(cleaned.c_str(), &end);
    if (end != cleaned.c_str() + cleaned.size()) return std::nullopt;
    return v;
}

}  // namespace

ChatRequest make_request(std::string model_id, std::string prompt, const std::string& image_ref, double temperature,
                         int max_tokens) {
    ChatRequest req;
    req.model_id = std::move(model_id);
    req.temperature = temperature;
    req.max_tokens = max_tokens;
    Message msg{"user", {}};
    if (!image_ref.empty()) msg.parts.push_back(ContentPart::image(image_ref));
    msg.parts.push_back(ContentPart::text(std::move(prompt)));
    req.messages.push_back(std::move(msg));
    return req;
}

void validate(const ChatRequest& request) {
    if (request.messages.empty()) throw PreconditionError("chat request has no messages");
    if (request.temperature < 0) throw PreconditionError("temperature must be >= 0");
    if (request.max_tokens <= 0) throw PreconditionError("max_tokens must be positive");
    for (const auto& m : request.messages) {
        int images = 0;
        for (const auto& p : m.parts) {
            if (p.kind == ContentPart::Kind::image) {
                if (p.value.empty()) throw PreconditionError("empty image reference");
                ++images;
            } else if (p.value.empty()) {
                throw PreconditionError("empty text part");
            }
        }
        if (images > 1) throw PreconditionError("a message may carry at most one image");
    }
}

std::string prompt_text(const ChatRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
        if (it->role != "user") continue;
        std::string out;
        for (const auto& p : it->parts) {
            if (p.kind == ContentPart::Kind::text) out += p.value;
        }
        return out;
    }
    return {};
}

std::optional<std::string> image_ref(const ChatRequest& request) {
    for (const auto& m : request.messages) {
        for (const auto& p : m.parts) {
            if (p.kind == ContentPart::Kind::image) return p.value;
        }
    }
    return std::nullopt;
}

bool is_url(std::string_view ref) {
    return text::istarts_with(ref, "http://") || text::istarts_with(ref, "https://") ||
           text::istarts_with(ref, "data:");
}

std::string_view to_string(BackendKind k) {
    switch (k) {
        case BackendKind::remote: return "remote";
        case BackendKind::scripted: return "scripted";
        case BackendKind::oracle: return "oracle";
    }
    return "remote";
}

BackendKind backend_kind_from_string(std::string_view s) {
    for (auto k : {BackendKind::remote, BackendKind::scripted, BackendKind::oracle}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError(fmt::format("unknown backend \"{}\" (expected remote, scripted or oracle)", s));
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 failed");
    }
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
}

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string image_data_uri(const std::filesystem::path& path) {
    return fmt::format("data:{};base64,{}", mime_for(path), base64_encode(read_binary(path)));
}

std::string cache_key(const ChatRequest& request) {
    validate(request);
    ojson messages = ojson::array();
    for (const auto& m : request.messages) {
        ojson parts = ojson::array();
        for (const auto& p : m.parts) {
            if (p.kind == ContentPart::Kind::text) {
                parts.push_back({{"text", p.value}});
            } else if (is_url(p.value)) {
                parts.push_back({{"image_url", p.value}});
            } else {
                parts.push_back({{"image_sha256", sha256_hex(read_binary(p.value))}});
            }
        }
        messages.push_back({{"role", m.role}, {"parts", parts}});
    }
    const ojson canonical{{"model_id", request.model_id},
                          {"temperature", request.temperature},
                          {"max_tokens", request.max_tokens},
                          {"messages", messages}};
    return sha256_hex(canonical.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
}

// ---- remote ---------------------------------------------------------------

RemoteBackend::RemoteBackend(RemoteOptions options) : options_(std::move(options)) {
    const auto& ep = options_.endpoint;
    const auto scheme_end = ep.find("://");
    if (scheme_end == std::string::npos || !(text::istarts_with(ep, "http://") || text::istarts_with(ep, "https://"))) {
        throw ConfigError(fmt::format("endpoint \"{}\" is not an http(s) URL", ep));
    }
    const auto path_start = ep.find('/', scheme_end + 3);
    host_ = ep.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : ep.substr(path_start);
    if (!options_.api_key_env.empty()) {
        const char* key = std::getenv(options_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw ConfigError(fmt::format("environment variable {} is not set", options_.api_key_env));
        }
        api_key_ = key;
    }
    if (options_.max_attempts < 1) options_.max_attempts = 1;
    if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

nlohmann::json RemoteBackend::request_body(const ChatRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : request.messages) {
        nlohmann::json content = nlohmann::json::array();
        for (const auto& p : m.parts) {
            if (p.kind == ContentPart::Kind::text) {
                content.push_back({{"type", "text"}, {"text", p.value}});
            } else {
                const auto url = is_url(p.value) ? p.value : image_data_uri(p.value);
                content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
            }
        }
        messages.push_back({{"role", m.role}, {"content", content}});
    }
    return {{"model", request.model_id},
            {"messages", messages},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};
}

ChatResponse RemoteBackend::parse_response_body(const std::string& body) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw BackendError("response body is not a JSON object");
    auto choices = j.find("choices");
    if (choices == j.end() || !choices->is_array() || choices->empty()) throw BackendError("response has no choices");
    const auto& message = (*choices)[0].value("message", nlohmann::json::object());
    ChatResponse resp;
    resp.backend = BackendKind::remote;
    const auto content = message.value("content", nlohmann::json());
    if (content.is_string()) {
        resp.text = content.get<std::string>();
    } else if (content.is_array()) {
        for (const auto& part : content) {
            if (part.is_object() && part.value("type", "") == "text") resp.text += part.value("text", "");
        }
    }
    if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
        Usage u;
        u.prompt_tokens = usage->value("prompt_tokens", std::int64_t{0});
        u.completion_tokens = usage->value("completion_tokens", std::int64_t{0});
        if (u.completion_tokens < 0) u.completion_tokens = 0;
        resp.usage = u;
    }
    return resp;
}

ChatResponse RemoteBackend::complete(const ChatRequest& request) {
    validate(request);
    const auto body = request_body(request).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    std::mt19937_64 jitter_rng(std::random_device{}());
    std::uniform_real_distribution<double> jitter(0.0, options_.jitter);
    std::string last_error;
    for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
        httplib::Client client(host_);
        client.set_connection_timeout(options_.timeout);
        client.set_read_timeout(options_.timeout);
        client.set_write_timeout(options_.timeout);
        auto res = client.Post(path_, headers, body, "application/json");

        auto delay = std::chrono::milliseconds(static_cast<std::int64_t>(
            static_cast<double>(options_.backoff_base.count()) * std::pow(2.0, attempt - 1) * (1.0 + jitter(jitter_rng))));
        if (!res) {
            last_error = fmt::format("transport error: {}", httplib::to_string(res.error()));
        } else if (res->status >= 200 && res->status < 300) {
            return parse_response_body(res->body);
        } else if (res->status == 429) {
            last_error = "rate limited (HTTP 429)";
            if (res->has_header("Retry-After")) {
                const auto ra = res->get_header_value("Retry-After");
                char* end = nullptr;
                const double secs = std::strtod(ra.c_str(), &end);
                if (end != ra.c_str() && secs >= 0) {
                    delay = std::chrono::milliseconds(static_cast<std::int64_t>(secs * 1000.0));
                }
            }
        } else if (res->status >= 400 && res->status < 500) {
            throw ConfigError(fmt::format("endpoint rejected the request with HTTP {}: {}", res->status,
                                          res->body.substr(0, 300)));
        } else {
            last_error = fmt::format("HTTP {}", res->status);
        }
        if (attempt < options_.max_attempts) {
            spdlog::warn("request attempt {}/{} failed ({}), retrying in {} ms", attempt, options_.max_attempts,
                         last_error, delay.count());
            options_.sleep(delay);
        }
    }
    throw BackendError(fmt::format("request failed after {} attempts: {}", options_.max_attempts, last_error));
}

// ---- scripted -------------------------------------------------------------

void ScriptedBackend::enqueue(Stage stage, std::string text, std::optional<Usage> usage) {
    std::lock_guard lock(mutex_);
    queues_[stage].push_back({std::move(text), usage});
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json(const nlohmann::json& script) {
    if (!script.is_object()) throw DataError("script must be an object keyed by stage");
    auto backend = std::make_unique<ScriptedBackend>();
    for (const auto& [key, items] : script.items()) {
        Stage stage;
        try {
            stage = stage_from_string(key);
        } catch (const PreconditionError& e) {
            throw DataError(fmt::format("script: {}", e.what()));
        }
        if (!items.is_array()) throw DataError(fmt::format("script: \"{}\" must be an array", key));
        for (const auto& item : items) {
            if (item.is_string()) {
                backend->enqueue(stage, item.get<std::string>());
            } else if (item.is_object() && item.contains("text") && item["text"].is_string()) {
                std::optional<Usage> usage;
                if (auto u = item.find("usage"); u != item.end() && u->is_object()) {
                    usage = Usage{u->value("prompt_tokens", std::int64_t{0}), u->value("completion_tokens", std::int64_t{0})};
                }
                backend->enqueue(stage, item["text"].get<std::string>(), usage);
            } else {
                throw DataError(fmt::format("script: bad item in \"{}\"", key));
            }
        }
    }
    return backend;
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot read script {}", path.string()));
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw DataError(fmt::format("script {} is not valid JSON", path.string()));
    return from_json(j);
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
    validate(request);
    const auto stage = prompts::classify(prompt_text(request));
    std::lock_guard lock(mutex_);
    auto& q = queues_[stage];
    if (q.empty()) throw BackendError(fmt::format("scripted queue for stage {} is exhausted", to_string(stage)));
    auto reply = std::move(q.front());
    q.pop_front();
    return ChatResponse{std::move(reply.text), reply.usage, BackendKind::scripted, false};
}

std::size_t ScriptedBackend::remaining(Stage stage) const {
    std::lock_guard lock(mutex_);
    auto it = queues_.find(stage);
    return it == queues_.end() ? 0 : it->second.size();
}

// ---- oracle ---------------------------------------------------------------

std::string_view to_string(DerivationOp op) {
    switch (op) {
        case DerivationOp::lookup: return "lookup";
        case DerivationOp::sum: return "sum";
        case DerivationOp::count: return "count";
        case DerivationOp::max: return "max";
        case DerivationOp::min: return "min";
        case DerivationOp::diff: return "diff";
    }
    return "lookup";
}

DerivationOp derivation_op_from_string(std::string_view s) {
    for (auto op : {DerivationOp::lookup, DerivationOp::sum, DerivationOp::count, DerivationOp::max, DerivationOp::min,
                    DerivationOp::diff}) {
        if (to_string(op) == s) return op;
    }
    throw DataError(fmt::format("unknown derivation op \"{}\"", s));
}

std::optional<std::string> apply_derivation(DerivationOp op, const std::vector<std::string>& contents) {
    if (op == DerivationOp::count) return std::to_string(contents.size());
    if (contents.empty()) return std::nullopt;
    if (op == DerivationOp::lookup) return contents.front();
    std::vector<double> xs;
    for (const auto& c : contents) {
        auto v = to_number(c);
        if (!v) return std::nullopt;
        xs.push_back(*v);
    }
    switch (op) {
        case DerivationOp::sum: {
            double s = 0;
            for (double x : xs) s += x;
            return format_number(s);
        }
        case DerivationOp::max: return format_number(*std::max_element(xs.begin(), xs.end()));
        case DerivationOp::min: return format_number(*std::min_element(xs.begin(), xs.end()));
        case DerivationOp::diff:
            if (xs.size() < 2) return std::nullopt;
            return format_number(xs[0] - xs[1]);
        default: break;
    }
    return std::nullopt;
}

Derivation derivation_from_json(const nlohmann::json& j) {
    try {
        const auto& t = j.at("table");
        TableText tt{source_format_from_string(t.at("format").get<std::string>()),
                     t.at("text").is_string() ? t.at("text").get<std::string>() : t.at("text").dump()};
        Derivation d{j.at("image").get<std::string>(), j.at("question").get<std::string>(), parse(tt), {}, {}, {}, DerivationOp::lookup, {}};
        for (const auto& e : j.at("evidence")) d.evidence.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
        d.columns = j.value("columns", std::vector<std::string>{});
        d.rows = j.value("rows", std::vector<std::string>{});
        d.op = derivation_op_from_string(j.value("op", std::string("lookup")));
        d.answer = j.at("answer").get<std::string>();
        for (const auto& at : d.evidence) d.table.cell_at(at);
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("derivation record: {}", e.what()));
    } catch (const RangeError& e) {
        throw DataError(fmt::format("derivation record: evidence {}", e.what()));
    } catch (const PreconditionError& e) {
        throw DataError(fmt::format("derivation record: {}", e.what()));
    }
}

nlohmann::ordered_json to_json(const Derivation& d) {
    ojson evidence = ojson::array();
    for (const auto& at : d.evidence) evidence.push_back({at.row, at.col});
    const auto tt = serialize(d.table, SourceFormat::canonical_json);
    return ojson{{"image", d.image_ref},
                 {"question", d.question},
                 {"table", {{"format", std::string(to_string(tt.format))}, {"text", tt.text}}},
                 {"evidence", evidence},
                 {"columns", d.columns},
                 {"rows", d.rows},
                 {"op", std::string(to_string(d.op))},
                 {"answer", d.answer}};
}

OracleBackend::OracleBackend(std::vector<Derivation> derivations) {
    for (auto& d : derivations) add(std::move(d));
}

std::unique_ptr<OracleBackend> OracleBackend::from_file(const std::filesystem::path& jsonl) {
    std::ifstream in(jsonl);
    if (!in) throw InputError(fmt::format("cannot read derivations {}", jsonl.string()));
    auto backend = std::make_unique<OracleBackend>();
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw DataError(fmt::format("{}:{}: not valid JSON", jsonl.string(), n));
        backend->add(derivation_from_json(j));
    }
    return backend;
}

void OracleBackend::add(Derivation d) {
    auto key = std::make_pair(d.image_ref, d.question);
    by_key_.insert_or_assign(std::move(key), std::move(d));
}

const Derivation& OracleBackend::find(const std::string& image, const std::string& question) const {
    auto it = by_key_.find({image, question});
    if (it == by_key_.end()) {
        throw BackendError(fmt::format("oracle has no derivation for image {} and question \"{}\"", image, question));
    }
    return it->second;
}

ChatResponse OracleBackend::complete(const ChatRequest& request) {
    validate(request);
    const auto prompt = prompt_text(request);
    const auto image = image_ref(request).value_or("");
    const auto stage = prompts::classify(prompt);
    const auto& d = find(image, prompts::extract_question(prompt));

    std::string reply;
    switch (stage) {
        case Stage::gse: {
            ojson plan{{"thought", fmt::format("{} over the listed rows and columns", to_string(d.op))},
                       {"target_columns", d.columns},
                       {"target_rows", d.rows}};
            reply = plan.dump(4);
            break;
        }
        case Stage::sse: {
            reply = "Plan Evaluation: \"correct\"\nSub-table:";
            for (const auto& at : d.evidence) {
                reply += fmt::format("\nRow {} Column {}: {}", at.row, at.col, d.table.cell_at(at).content);
            }
            break;
        }
        case Stage::egr: {
            const auto pos = prompt.rfind("Sub-table:\n");
            const auto end = prompt.rfind("\n\nQuestion: \n");
            std::vector<std::string> contents;
            if (pos != std::string::npos && end != std::string::npos && end > pos) {
                for (const auto& c : pipeline::scan_cell_lines(std::string_view(prompt).substr(pos, end - pos))) {
                    contents.push_back(c.content);
                }
            }
            const auto answer = apply_derivation(d.op, contents).value_or("unknown");
            reply = fmt::format("Reasoning: \"{} of {} evidence cells\"\n{}", to_string(d.op), contents.size(),
                                ojson{{"answer", answer}}.dump());
            break;
        }
        case Stage::cot:
            reply = fmt::format("The evidence gives {}.\n{}", d.answer, ojson{{"answer", d.answer}}.dump());
            break;
        case Stage::direct:
        case Stage::other: reply = ojson{{"answer", d.answer}}.dump(); break;
    }
    return ChatResponse{reply, Usage{word_count(prompt), word_count(reply)}, BackendKind::oracle, false};
}

// ---- cache ----------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError(fmt::format("cannot create cache directory {}: {}", dir_.string(), ec.message()));
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string()) {
        spdlog::warn("ignoring unreadable cache record {}", path_for(key).string());
        return std::nullopt;
    }
    ChatResponse resp;
    resp.text = j["text"].get<std::string>();
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
        resp.usage = Usage{u->value("prompt_tokens", std::int64_t{0}), u->value("completion_tokens", std::int64_t{0})};
    }
    try {
        resp.backend = backend_kind_from_string(j.value("backend", std::string("remote")));
    } catch (const ConfigError&) {
        resp.backend = BackendKind::remote;
    }
    resp.cache_hit = true;
    return resp;
}

void ResponseCache::put(const std::string& key, const ChatResponse& response) const {
    const auto target = path_for(key);
    std::filesystem::create_directories(target.parent_path());
    ojson j{{"key", key}, {"backend", std::string(to_string(response.backend))}, {"text", response.text}};
    if (response.usage) {
        j["usage"] = {{"prompt_tokens", response.usage->prompt_tokens},
                      {"completion_tokens", response.usage->completion_tokens}};
    }
    static std::atomic<std::uint64_t> counter{0};
    const auto tmp = target.parent_path() /
                     fmt::format(".{}.{}.{}.tmp", key, std::hash<std::thread::id>{}(std::this_thread::get_id()),
                                 counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError(fmt::format("cannot write cache record {}", tmp.string()));
        out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    }
    std::filesystem::rename(tmp, target);
}

// ---- gateway --------------------------------------------------------------

Gateway::Gateway(std::unique_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, options_.concurrency))) {
    if (!backend_) throw PreconditionError("gateway needs a backend");
    if (options_.concurrency < 1) throw ConfigError("concurrency must be at least 1");
    if (options_.cache_dir) cache_.emplace(*options_.cache_dir);
}

ChatResponse Gateway::complete(const ChatRequest& request, bool bypass_cache_read) {
    validate(request);
    CallRecord record{prompts::classify(prompt_text(request)), prompt_text(request), image_ref(request).value_or(""),
                      false};
    std::string key;
    std::optional<ChatResponse> resp;
    if (cache_) {
        key = cache_key(request);
        if (!bypass_cache_read) resp = cache_->get(key);
    }
    if (!resp) {
        slots_.acquire();
        try {
            resp = backend_->complete(request);
        } catch (...) {
            slots_.release();
            throw;
        }
        slots_.release();
        resp->cache_hit = false;
        if (cache_) cache_->put(key, *resp);
    }
    record.cache_hit = resp->cache_hit;
    {
        std::lock_guard lock(log_mutex_);
        log_.push_back(std::move(record));
    }
    return *resp;
}

std::vector<CallRecord> Gateway::call_log() const {
    std::lock_guard lock(log_mutex_);
    return log_;
}

void Gateway::clear_call_log() {
    std::lock_guard lock(log_mutex_);
    log_.clear();
}

}  // namespace tabgls::gateway
