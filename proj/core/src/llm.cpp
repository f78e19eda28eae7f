// SPDX-License-Identifier: Apache-2.0
#include "kgqa/llm.hpp"

#include "kgqa/error.hpp"

#include "http.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace kgqa {

std::vector<std::string> script_segments(std::string_view text, Profile profile)
{
    std::vector<std::string> out;
    const auto markers = find_markers(text, profile);
    std::size_t start = 0;
    for (std::size_t i = 0; i < markers.size(); ++i) {
        if (markers[i].kind != EventKind::Obs)
            continue;
        out.emplace_back(text.substr(start, markers[i].start - start));
        start = i + 1 < markers.size() ? markers[i + 1].start : text.size();
    }
    const auto rest = text.substr(start);
    if (rest.find_first_not_of(" \t\r\n") != std::string_view::npos)
        out.emplace_back(rest);
    return out;
}

ScriptedAdapter::ScriptedAdapter(std::string_view trace_text, Profile profile)
    : segments_(script_segments(trace_text, profile))
{
}

ScriptedAdapter ScriptedAdapter::from_file(const std::filesystem::path& path, Profile profile)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, fmt::format("cannot open scripted trace {}", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return ScriptedAdapter(buf.str(), profile);
}

std::string ScriptedAdapter::complete(const std::vector<ChatMessage>&, const std::vector<std::string>&)
{
    std::lock_guard lock(mutex_);
    if (next_ >= segments_.size())
        return {};
    return segments_[next_++];
}

std::size_t ScriptedAdapter::remaining() const
{
    std::lock_guard lock(mutex_);
    return segments_.size() - next_;
}

std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop)
{
    std::size_t cut = text.size();
    for (const auto& s : stop)
        if (!s.empty())
            cut = std::min(cut, text.find(s));
    text.resize(cut);
    return text;
}

RemoteLlmAdapter::RemoteLlmAdapter(LlmEndpointConfig config)
    : config_(std::move(config)), in_flight_(std::max<std::ptrdiff_t>(1, config_.max_in_flight))
{
    if (config_.url.empty())
        throw Error(ErrorCode::ConfigError, "llm.endpoint is not configured");
    if (config_.url.find("://") == std::string::npos)
        throw Error(ErrorCode::ConfigError, fmt::format("llm.endpoint '{}' has no scheme", config_.url));
    if (!config_.api_key_env.empty())
        if (const char* key = std::getenv(config_.api_key_env.c_str()))
            api_key_ = key;
}

std::string RemoteLlmAdapter::complete(const std::vector<ChatMessage>& messages, const std::vector<std::string>& stop)
{
    nlohmann::json body;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    body["stop"] = stop;
    detail::HttpHeaders headers;
    if (!api_key_.empty())
        headers.emplace_back("Authorization", "Bearer " + api_key_);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(250) * (1 << std::min(attempt - 1, 6)));
        detail::HttpResponse res;
        in_flight_.acquire();
        try {
            res = detail::http_post(config_.url, body.dump(), "application/json", headers, config_.timeout);
        } catch (const Error& e) {
            in_flight_.release();
            if (e.code() != ErrorCode::ProviderError)
                throw;
            last_error = e.what();
            continue;
        }
        in_flight_.release();
        if (res.status == 429 || res.status >= 500) {
            last_error = fmt::format("HTTP {}", res.status);
            continue;
        }
        if (res.status < 200 || res.status >= 300)
            throw Error(ErrorCode::ProviderError, fmt::format("LLM endpoint returned HTTP {}", res.status));
        try {
            return truncate_at_stop(nlohmann::json::parse(res.body).at("content").get<std::string>(), stop);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ProviderError, fmt::format("malformed LLM response: {}", e.what()));
        }
    }
    throw Error(ErrorCode::ProviderError,
                fmt::format("LLM endpoint failed after {} attempts: {}", config_.max_retries + 1, last_error));
}

} // namespace kgqa
