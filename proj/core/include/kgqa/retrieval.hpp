// SPDX-License-Identifier: Apache-2.0
//
// Ranking of schema items against a task description.
#pragma once

#include <chrono>
#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgqa {

enum class RetrievalMode { Embedding, Lexical };

std::string_view to_string(RetrievalMode mode) noexcept;
/// "embedding" or "lexical"; throws ConfigError otherwise.
RetrievalMode parse_retrieval_mode(std::string_view text);

struct ScoredCandidate {
    std::string name;
    double score = 0.0;
    RetrievalMode source = RetrievalMode::Lexical;

    friend bool operator==(const ScoredCandidate&, const ScoredCandidate&) = default;
};

/// Maps texts to fixed-dimension vectors. Implementations must be safe to call
/// from several threads.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    [[nodiscard]] virtual std::vector<std::vector<float>> embed(std::span<const std::string> texts) = 0;
    [[nodiscard]] virtual std::size_t dimension() const = 0;
};

/// Offline provider: signed feature hashing of lower-cased word tokens and
/// character trigrams, L2-normalised.
class HashingEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HashingEmbeddingProvider(std::size_t dimension = 256);
    std::vector<std::vector<float>> embed(std::span<const std::string> texts) override;
    std::size_t dimension() const override { return dimension_; }

private:
    std::size_t dimension_;
};

/// POSTs {"texts": [...]} and expects {"vectors": [[...], ...]}. At most
/// `max_in_flight` requests are outstanding at once across threads.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
    RemoteEmbeddingProvider(std::string url, std::size_t dimension, std::ptrdiff_t max_in_flight = 4,
                            std::chrono::seconds timeout = std::chrono::seconds(30));
    std::vector<std::vector<float>> embed(std::span<const std::string> texts) override;
    std::size_t dimension() const override { return dimension_; }

private:
    std::string url_;
    std::size_t dimension_;
    std::chrono::seconds timeout_;
    std::counting_semaphore<> in_flight_;
};

/// Bounded LRU cache keyed by exact text in front of another provider.
class CachingEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit CachingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner, std::size_t capacity = 10'000);
    std::vector<std::vector<float>> embed(std::span<const std::string> texts) override;
    std::size_t dimension() const override { return inner_->dimension(); }

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::size_t hits() const;
    [[nodiscard]] std::size_t misses() const;

private:
    using Entry = std::pair<std::string, std::vector<float>>;

    std::shared_ptr<EmbeddingProvider> inner_;
    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::list<Entry> order_; // most recent first
    std::unordered_map<std::string, std::list<Entry>::iterator> index_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

/// Schema name with '.' and '_' turned into spaces.
[[nodiscard]] std::string candidate_text(std::string_view name);
/// Lower-cased alphanumeric runs.
[[nodiscard]] std::vector<std::string> tokenize(std::string_view text);
/// Multiset token-overlap F1 between a query and a schema name.
[[nodiscard]] double token_f1(std::string_view query, std::string_view name);

class Retriever {
public:
    /// Lexical retriever.
    Retriever() = default;
    /// Embedding retriever (cosine similarity).
    explicit Retriever(std::shared_ptr<EmbeddingProvider> provider);

    [[nodiscard]] RetrievalMode mode() const noexcept;

    /// Every candidate, by score descending then name ascending. Duplicate
    /// names are scored once. Throws EmptyCandidates / InvalidArgument /
    /// ProviderError.
    [[nodiscard]] std::vector<ScoredCandidate> rank(std::string_view query,
                                                    std::span<const std::string> candidates) const;
    /// The first min(k, |candidates|) names of rank().
    [[nodiscard]] std::vector<std::string> topk(std::string_view query, std::span<const std::string> candidates,
                                                std::size_t k = 5) const;

private:
    std::shared_ptr<EmbeddingProvider> provider_;
};

} // namespace kgqa
