// SPDX-License-Identifier: Apache-2.0
#include "kgqa/retrieval.hpp"

#include "kgqa/error.hpp"

#include "http.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace kgqa {

std::string_view to_string(RetrievalMode mode) noexcept
{
    return mode == RetrievalMode::Embedding ? "embedding" : "lexical";
}

RetrievalMode parse_retrieval_mode(std::string_view text)
{
    if (text == "embedding")
        return RetrievalMode::Embedding;
    if (text == "lexical")
        return RetrievalMode::Lexical;
    throw Error(ErrorCode::ConfigError, fmt::format("retriever.mode must be 'embedding' or 'lexical', got '{}'", text));
}

std::string candidate_text(std::string_view name)
{
    std::string out(name);
    std::replace(out.begin(), out.end(), '.', ' ');
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty())
        out.push_back(std::move(cur));
    return out;
}

double token_f1(std::string_view query, std::string_view name)
{
    const auto q = tokenize(query);
    const auto c = tokenize(candidate_text(name));
    if (q.empty() || c.empty())
        return 0.0;
    std::map<std::string, int> counts;
    for (const auto& t : q)
        ++counts[t];
    int overlap = 0;
    for (const auto& t : c) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0)
        return 0.0;
    const double p = static_cast<double>(overlap) / static_cast<double>(c.size());
    const double r = static_cast<double>(overlap) / static_cast<double>(q.size());
    return 2 * p * r / (p + r);
}

// ---- providers -----------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void normalize(std::vector<float>& v)
{
    double norm = 0;
    for (float x : v)
        norm += static_cast<double>(x) * x;
    if (norm == 0)
        return;
    const double inv = 1.0 / std::sqrt(norm);
    for (float& x : v)
        x = static_cast<float>(x * inv);
}

} // namespace

HashingEmbeddingProvider::HashingEmbeddingProvider(std::size_t dimension) : dimension_(dimension)
{
    if (dimension_ == 0)
        throw Error(ErrorCode::InvalidArgument, "embedding dimension must be positive");
}

std::vector<std::vector<float>> HashingEmbeddingProvider::embed(std::span<const std::string> texts)
{
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        std::vector<float> v(dimension_, 0.0f);
        auto add = [&](std::string_view feature, float weight) {
            const auto h = fnv1a(feature);
            v[h % dimension_] += (h >> 63) ? -weight : weight;
        };
        for (const auto& tok : tokenize(text)) {
            add(tok, 1.0f);
            const std::string padded = "#" + tok + "#";
            for (std::size_t i = 0; i + 3 <= padded.size(); ++i)
                add(std::string_view(padded).substr(i, 3), 0.25f);
        }
        normalize(v);
        out.push_back(std::move(v));
    }
    return out;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::string url, std::size_t dimension, std::ptrdiff_t max_in_flight,
                                                 std::chrono::seconds timeout)
    : url_(std::move(url)), dimension_(dimension), timeout_(timeout), in_flight_(std::max<std::ptrdiff_t>(1, max_in_flight))
{
}

std::vector<std::vector<float>> RemoteEmbeddingProvider::embed(std::span<const std::string> texts)
{
    const nlohmann::json body = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    in_flight_.acquire();
    detail::HttpResponse res;
    try {
        res = detail::http_post(url_, body.dump(), "application/json", {}, timeout_);
    } catch (...) {
        in_flight_.release();
        throw;
    }
    in_flight_.release();
    if (res.status < 200 || res.status >= 300)
        throw Error(ErrorCode::ProviderError, fmt::format("embedding endpoint {} returned HTTP {}", url_, res.status));
    std::vector<std::vector<float>> vectors;
    try {
        vectors = nlohmann::json::parse(res.body).at("vectors").get<std::vector<std::vector<float>>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProviderError, fmt::format("malformed embedding response: {}", e.what()));
    }
    if (vectors.size() != texts.size())
        throw Error(ErrorCode::ProviderError,
                    fmt::format("embedding endpoint returned {} vectors for {} texts", vectors.size(), texts.size()));
    for (const auto& v : vectors)
        if (v.size() != dimension_)
            throw Error(ErrorCode::ProviderError,
                        fmt::format("embedding of dimension {} where {} was configured", v.size(), dimension_));
    return vectors;
}

CachingEmbeddingProvider::CachingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner, std::size_t capacity)
    : inner_(std::move(inner)), capacity_(std::max<std::size_t>(1, capacity))
{
}

std::vector<std::vector<float>> CachingEmbeddingProvider::embed(std::span<const std::string> texts)
{
    std::vector<std::vector<float>> out(texts.size());
    std::vector<std::string> missing;
    std::vector<std::size_t> missing_at;
    {
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            auto it = index_.find(texts[i]);
            if (it != index_.end()) {
                order_.splice(order_.begin(), order_, it->second);
                out[i] = it->second->second;
                ++hits_;
            } else {
                missing.push_back(texts[i]);
                missing_at.push_back(i);
                ++misses_;
            }
        }
    }
    if (missing.empty())
        return out;
    auto fresh = inner_->embed(missing);
    std::lock_guard lock(mutex_);
    for (std::size_t m = 0; m < missing.size(); ++m) {
        out[missing_at[m]] = fresh[m];
        if (index_.contains(missing[m]))
            continue;
        order_.emplace_front(missing[m], std::move(fresh[m]));
        index_[missing[m]] = order_.begin();
        if (order_.size() > capacity_) {
            index_.erase(order_.back().first);
            order_.pop_back();
        }
    }
    return out;
}

std::size_t CachingEmbeddingProvider::size() const
{
    std::lock_guard lock(mutex_);
    return order_.size();
}

std::size_t CachingEmbeddingProvider::hits() const
{
    std::lock_guard lock(mutex_);
    return hits_;
}

std::size_t CachingEmbeddingProvider::misses() const
{
    std::lock_guard lock(mutex_);
    return misses_;
}

// ---- retriever -------------------------------------------------------------

Retriever::Retriever(std::shared_ptr<EmbeddingProvider> provider) : provider_(std::move(provider)) {}

RetrievalMode Retriever::mode() const noexcept
{
    return provider_ ? RetrievalMode::Embedding : RetrievalMode::Lexical;
}

std::vector<ScoredCandidate> Retriever::rank(std::string_view query, std::span<const std::string> candidates) const
{
    if (candidates.empty())
        throw Error(ErrorCode::EmptyCandidates, "no candidates to rank");
    if (query.empty())
        throw Error(ErrorCode::InvalidArgument, "empty retrieval query");

    const std::set<std::string> unique(candidates.begin(), candidates.end());
    std::vector<ScoredCandidate> out;
    out.reserve(unique.size());
    if (!provider_) {
        for (const auto& name : unique)
            out.push_back({name, token_f1(query, name), RetrievalMode::Lexical});
    } else {
        std::vector<std::string> texts;
        texts.reserve(unique.size() + 1);
        texts.emplace_back(query);
        for (const auto& name : unique)
            texts.push_back(candidate_text(name));
        const auto vectors = provider_->embed(texts);
        if (vectors.size() != texts.size())
            throw Error(ErrorCode::ProviderError, "embedding provider returned the wrong number of vectors");
        auto cosine = [](const std::vector<float>& a, const std::vector<float>& b) {
            double dot = 0, na = 0, nb = 0;
            for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
                dot += static_cast<double>(a[i]) * b[i];
                na += static_cast<double>(a[i]) * a[i];
                nb += static_cast<double>(b[i]) * b[i];
            }
            if (na == 0 || nb == 0)
                return 0.0;
            return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
        };
        std::size_t i = 1;
        for (const auto& name : unique) {
            const double s = cosine(vectors[0], vectors[i++]);
            out.push_back({name, std::isfinite(s) ? s : 0.0, RetrievalMode::Embedding});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const ScoredCandidate& a, const ScoredCandidate& b) {
        if (a.score != b.score)
            return a.score > b.score;
        return a.name < b.name;
    });
    return out;
}

std::vector<std::string> Retriever::topk(std::string_view query, std::span<const std::string> candidates,
                                         std::size_t k) const
{
    if (k == 0)
        throw Error(ErrorCode::InvalidArgument, "top-k needs k >= 1");
    const auto ranked = rank(query, candidates);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i)
        out.push_back(ranked[i].name);
    return out;
}

} // namespace kgqa
