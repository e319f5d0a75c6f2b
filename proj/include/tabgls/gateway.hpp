#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabgls/codec.hpp"
#include "tabgls/prompts.hpp"
#include "tabgls/table.hpp"

namespace tabgls::gateway {

struct ContentPart {
    enum class Kind { text, image };
    Kind kind = Kind::text;
    // Text, or an image reference: a local path or an http(s)/data URL.
    std::string value;

    static ContentPart text(std::string s) { return {Kind::text, std::move(s)}; }
    static ContentPart image(std::string ref) { return {Kind::image, std::move(ref)}; }
};

struct Message {
    std::string role;
    std::vector<ContentPart> parts;
};

struct ChatRequest {
    std::string model_id;
    std::vector<Message> messages;
    double temperature = 0.0;
    int max_tokens = 1024;
};

/// One user message carrying the image (when given) followed by the prompt.
ChatRequest make_request(std::string model_id, std::string prompt, const std::string& image_ref,
                         double temperature = 0.0, int max_tokens = 1024);

/// Throws PreconditionError for empty text parts, more than one image per
/// message, negative temperature or non-positive max_tokens.
void validate(const ChatRequest& request);

/// Concatenated text parts of the last user message.
std::string prompt_text(const ChatRequest& request);
/// First image reference in the request, if any.
std::optional<std::string> image_ref(const ChatRequest& request);

bool is_url(std::string_view ref);

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

enum class BackendKind { remote, scripted, oracle };
std::string_view to_string(BackendKind k);
BackendKind backend_kind_from_string(std::string_view s);

struct ChatResponse {
    std::string text;
    std::optional<Usage> usage;
    BackendKind backend = BackendKind::scripted;
    bool cache_hit = false;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual BackendKind kind() const noexcept = 0;
};

/// Hex SHA-256 over the model, sampling parameters, message texts and image
/// content digests. Local images are hashed by content, URLs by string.
std::string cache_key(const ChatRequest& request);

std::string sha256_hex(std::string_view bytes);
std::string base64_encode(std::string_view bytes);
/// "data:<mime>;base64,..." for a local image; InputError if unreadable.
std::string image_data_uri(const std::filesystem::path& path);

struct RemoteOptions {
    // Full chat-completions URL, e.g. https://host/v1/chat/completions.
    std::string endpoint;
    // Environment variable holding the bearer token; empty disables auth.
    std::string api_key_env = "TABGLS_API_KEY";
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{1000};
    double jitter = 0.25;
    std::chrono::seconds timeout{120};
    std::function<void(std::chrono::milliseconds)> sleep;
};

class RemoteBackend : public Backend {
public:
    /// ConfigError if the endpoint is malformed or the key variable is unset.
    explicit RemoteBackend(RemoteOptions options);

    ChatResponse complete(const ChatRequest& request) override;
    BackendKind kind() const noexcept override { return BackendKind::remote; }

    /// Wire body sent for a request.
    static nlohmann::json request_body(const ChatRequest& request);
    /// First choice text and usage from a chat-completion response body.
    static ChatResponse parse_response_body(const std::string& body);

private:
    RemoteOptions options_;
    std::string host_;
    std::string path_;
    std::string api_key_;
};

struct ScriptedReply {
    std::string text;
    std::optional<Usage> usage;
};

/// Replies from per-stage queues, in order. An exhausted queue is a
/// BackendError.
class ScriptedBackend : public Backend {
public:
    ScriptedBackend() = default;

    void enqueue(Stage stage, std::string text, std::optional<Usage> usage = std::nullopt);
    /// {"gse": [...], "sse": [...], ...}; items are strings or
    /// {"text": ..., "usage": {"prompt_tokens", "completion_tokens"}}.
    static std::unique_ptr<ScriptedBackend> from_json(const nlohmann::json& script);
    static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

    ChatResponse complete(const ChatRequest& request) override;
    BackendKind kind() const noexcept override { return BackendKind::scripted; }

    std::size_t remaining(Stage stage) const;

private:
    mutable std::mutex mutex_;
    std::map<Stage, std::deque<ScriptedReply>> queues_;
};

enum class DerivationOp { lookup, sum, count, max, min, diff };
std::string_view to_string(DerivationOp op);
DerivationOp derivation_op_from_string(std::string_view s);

/// Gold record for one question: the table, the evidence cells, the labels
/// a plan should name, and how the answer follows from the evidence.
struct Derivation {
    std::string image_ref;
    std::string question;
    Table table;
    std::vector<GridIndex> evidence;
    std::vector<std::string> columns;
    std::vector<std::string> rows;
    DerivationOp op = DerivationOp::lookup;
    std::string answer;
};

/// {"image", "question", "table": {"format", "text"}, "evidence": [[r, c], ...],
///  "columns", "rows", "op", "answer"}
Derivation derivation_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Derivation& d);

/// Applies op to the evidence contents in order. Numbers are formatted
/// without a trailing ".0"; lookup returns the first content.
std::optional<std::string> apply_derivation(DerivationOp op, const std::vector<std::string>& contents);

/// Answers every stage from registered gold derivations. EGR replies are
/// computed from the sub-table lines present in the prompt.
class OracleBackend : public Backend {
public:
    OracleBackend() = default;
    explicit OracleBackend(std::vector<Derivation> derivations);
    static std::unique_ptr<OracleBackend> from_file(const std::filesystem::path& jsonl);

    void add(Derivation d);

    ChatResponse complete(const ChatRequest& request) override;
    BackendKind kind() const noexcept override { return BackendKind::oracle; }

private:
    const Derivation& find(const std::string& image, const std::string& question) const;

    std::map<std::pair<std::string, std::string>, Derivation> by_key_;
};

/// Content-addressed directory of JSON records, one file per key.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<ChatResponse> get(const std::string& key) const;
    /// Atomic per key: written to a temporary file, then renamed.
    void put(const std::string& key, const ChatResponse& response) const;

    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path path_for(const std::string& key) const;

    std::filesystem::path dir_;
};

struct CallRecord {
    Stage stage = Stage::other;
    std::string prompt;
    std::string image_ref;
    bool cache_hit = false;
};

struct GatewayOptions {
    std::size_t concurrency = 8;
    std::optional<std::filesystem::path> cache_dir;
};

/// Shared entry point for all model calls: bounds in-flight requests,
/// consults the cache and keeps a call log.
class Gateway {
public:
    Gateway(std::unique_ptr<Backend> backend, GatewayOptions options = {});

    /// With bypass_cache_read the backend is always called; the reply still
    /// refreshes the cache.
    ChatResponse complete(const ChatRequest& request, bool bypass_cache_read = false);

    std::vector<CallRecord> call_log() const;
    void clear_call_log();
    BackendKind backend_kind() const noexcept { return backend_->kind(); }

private:
    std::unique_ptr<Backend> backend_;
    GatewayOptions options_;
    std::optional<ResponseCache> cache_;
    std::counting_semaphore<> slots_;
    mutable std::mutex log_mutex_;
    std::vector<CallRecord> log_;
};

}  // namespace tabgls::gateway
