// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "kgqa/trace.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

namespace kgqa {

struct ChatMessage {
    std::string role; // system, user or assistant
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

class LlmAdapter {
public:
    virtual ~LlmAdapter() = default;
    /// Next generation for the conversation. Throws ProviderError.
    [[nodiscard]] virtual std::string complete(const std::vector<ChatMessage>& messages,
                                               const std::vector<std::string>& stop) = 0;
};

/// Splits a recorded trace into the segments a model would have produced:
/// each ends just before an observation marker, and observation bodies are
/// dropped because the runtime renders them.
[[nodiscard]] std::vector<std::string> script_segments(std::string_view trace_text, Profile profile);

/// Replays a recorded trace one segment per call, ignoring the prompt.
/// Returns an empty string once the script is exhausted.
class ScriptedAdapter final : public LlmAdapter {
public:
    ScriptedAdapter(std::string_view trace_text, Profile profile);
    static ScriptedAdapter from_file(const std::filesystem::path& path, Profile profile);

    std::string complete(const std::vector<ChatMessage>& messages, const std::vector<std::string>& stop) override;
    [[nodiscard]] std::size_t remaining() const;

private:
    std::vector<std::string> segments_;
    std::size_t next_ = 0;
    mutable std::mutex mutex_;
};

struct LlmEndpointConfig {
    std::string url;
    std::string api_key_env = "DARA_LLM_API_KEY";
    int max_retries = 2;
    std::chrono::seconds timeout{120};
    std::ptrdiff_t max_in_flight = 8;
};

/// POSTs {"messages": [...], "stop": [...]} and reads {"content": "..."}.
/// Transport failures, HTTP 429 and 5xx are retried with exponential backoff.
class RemoteLlmAdapter final : public LlmAdapter {
public:
    /// Throws ConfigError when the URL is empty or has no scheme.
    explicit RemoteLlmAdapter(LlmEndpointConfig config);
    std::string complete(const std::vector<ChatMessage>& messages, const std::vector<std::string>& stop) override;

private:
    LlmEndpointConfig config_;
    std::string api_key_;
    std::counting_semaphore<> in_flight_;
};

/// Text up to the earliest stop sequence.
[[nodiscard]] std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop);

} // namespace kgqa
