// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: command-line flags over environment variables over the
// JSON config file.
#pragma once

#include <kgqa/agent.hpp>
#include <kgqa/eval.hpp>
#include <kgqa/graph.hpp>
#include <kgqa/llm.hpp>
#include <kgqa/retrieval.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace kgqa::cli {

namespace fs = std::filesystem;

inline constexpr int kExitInput = 2;
inline constexpr int kExitConfig = 3;

/// Terminates the command with `code` after printing `what` to stderr.
struct ExitError : std::runtime_error {
    ExitError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
    int code;
};

[[noreturn]] void config_error(const std::string& what);

struct Settings {
    std::optional<fs::path> triples;
    std::optional<fs::path> schema;
    std::optional<std::string> sparql_endpoint;

    std::optional<std::string> llm; // endpoint URL or scripted:<dir>
    LlmEndpointConfig endpoint;

    std::string retriever_mode = "lexical";
    std::optional<std::string> retriever_endpoint;
    std::size_t retriever_dimension = 256;

    AgentConfig agent;

    std::optional<ZeroShotReading> zero_shot;
    std::optional<fs::path> train;
    std::size_t jobs = 1;
    std::uint64_t seed = 0;

    /// Snapshot for run manifests; never contains secrets.
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Flags parsed from the command line, unset when absent.
struct Overrides {
    std::optional<std::string> config;
    std::optional<fs::path> triples;
    std::optional<fs::path> schema;
    std::optional<std::string> sparql_endpoint;
    std::optional<std::string> llm;
    std::optional<std::string> api_key_env;
    std::optional<int> max_retries;
    std::optional<std::string> retriever;
    std::optional<std::string> profile;
    std::optional<std::size_t> topk;
    std::optional<std::size_t> deep_read_n;
    std::optional<std::size_t> max_tasks;
    std::optional<std::size_t> max_steps;
    std::optional<std::size_t> max_actions;
    std::optional<std::size_t> baseline_max_actions;
    std::optional<std::string> zero_shot;
    std::optional<fs::path> train;
    std::optional<std::size_t> jobs;
    std::optional<std::uint64_t> seed;
};

/// Config file from --config, else $DARA_CONFIG, else none. Unknown keys are
/// configuration errors. Relative paths resolve against the file's directory.
[[nodiscard]] Settings resolve_settings(const Overrides& flags);

/// Loads the in-memory graph; a missing --kg or --schema is a configuration error.
[[nodiscard]] KnowledgeGraph require_graph(const Settings& settings);
[[nodiscard]] SchemaView require_schema(const Settings& settings);
[[nodiscard]] Retriever make_retriever(const Settings& settings);

} // namespace kgqa::cli
