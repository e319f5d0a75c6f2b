#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "tabgls/gateway.hpp"
#include "tabgls/pipeline.hpp"

namespace tabgls::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kBackend = 3 };

struct RunConfig {
    // backend
    gateway::BackendKind backend = gateway::BackendKind::remote;
    std::string endpoint;
    std::string model_id = "default";
    std::string api_key_env = "TABGLS_API_KEY";
    double temperature = 0.0;
    int max_tokens = 1024;
    std::size_t concurrency = 8;
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::filesystem::path> script;
    std::optional<std::filesystem::path> derivations;

    // pipeline
    pipeline::Mode mode = pipeline::Mode::gls;
    pipeline::EmptyEvidencePolicy empty_evidence = pipeline::EmptyEvidencePolicy::fallback_cot;
    int max_reasks = 2;

    // datagen
    std::optional<std::uint64_t> seed;
    std::size_t local_per_table = 1;
    std::string placeholder = "[table content]";
    double max_skip_rate = 0.01;
    bool strict_images = false;

    // paths
    std::optional<std::filesystem::path> corpus;
    std::optional<std::filesystem::path> dataset;
    std::optional<std::filesystem::path> examples;
    std::optional<std::filesystem::path> predictions;
    std::optional<std::filesystem::path> golds;
    std::optional<std::filesystem::path> report;
};

/// INI-style file with [backend], [pipeline], [datagen] and [paths]
/// sections; values may be quoted. Unknown keys are a ConfigError.
RunConfig load_config(const std::filesystem::path& path);

/// Builds the gateway the config asks for.
std::unique_ptr<gateway::Gateway> make_gateway(const RunConfig& config);

/// Entry point behind the tabgls executable. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tabgls::cli
