// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fixtures.hpp"

#include <kgqa/error.hpp>
#include <kgqa/retrieval.hpp>

#include <algorithm>
#include <cmath>
#include <thread>

using namespace kgqa;

namespace {

// Multiset token-overlap F1, computed independently of the library.
double by_hand_f1(const std::vector<std::string>& q, const std::vector<std::string>& n)
{
    std::vector<std::string> a = q;
    std::vector<std::string> b = n;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::string> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    if (common.empty())
        return 0.0;
    const double p = static_cast<double>(common.size()) / static_cast<double>(b.size());
    const double r = static_cast<double>(common.size()) / static_cast<double>(a.size());
    return 2 * p * r / (p + r);
}

class CountingProvider final : public EmbeddingProvider {
public:
    std::vector<std::vector<float>> embed(std::span<const std::string> texts) override
    {
        calls += texts.size();
        std::vector<std::vector<float>> out;
        for (const auto& t : texts)
            out.push_back({static_cast<float>(t.size()), 1.0f});
        return out;
    }
    std::size_t dimension() const override { return 2; }
    std::size_t calls = 0;
};

class FailingProvider final : public EmbeddingProvider {
public:
    std::vector<std::vector<float>> embed(std::span<const std::string>) override
    {
        throw Error(ErrorCode::ProviderError, "backend unavailable");
    }
    std::size_t dimension() const override { return 4; }
};

} // namespace

TEST_CASE("lexical: olympic mascot ranks first")
{
    const std::vector<std::string> c = {"type.object.name", "olympics.olympic_mascot.olympic_games"};
    const auto ranked = Retriever().rank("olympic games mascot", c);
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].name == "olympics.olympic_mascot.olympic_games");
    // olympic games mascot vs {olympics, olympic, mascot, olympic, games}: 3 shared tokens.
    CHECK(ranked[0].score == doctest::Approx(by_hand_f1({"olympic", "games", "mascot"},
                                                        {"olympics", "olympic", "mascot", "olympic", "games"})));
    CHECK(ranked[1].score == 0.0);
    CHECK(ranked[0].source == RetrievalMode::Lexical);
}

TEST_CASE("rank: single candidate, ties and errors")
{
    const std::vector<std::string> one = {"a.b.c"};
    CHECK(Retriever().rank("unrelated words", one).at(0).name == "a.b.c");
    const std::vector<std::string> tie = {"z.thing", "a.thing"};
    const auto ranked = Retriever().rank("nothing shared", tie);
    CHECK(ranked[0].name == "a.thing");
    CHECK(ranked[1].name == "z.thing");
    try {
        (void)Retriever().rank("q", {});
        FAIL("expected EmptyCandidates");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyCandidates);
    }
}

TEST_CASE("topk: min rule and Ronny relations")
{
    const std::vector<std::string> three = {"a.x", "b.y", "c.z"};
    CHECK(Retriever().topk("q", three, 5).size() == 3);
    CHECK(Retriever().topk("x", three, 1) == std::vector<std::string>{"a.x"});

    std::vector<std::string> out;
    for (const auto& e : testing::fixture_graph().outgoing("m.04dwjbg"))
        if (std::find(out.begin(), out.end(), e.predicate) == out.end())
            out.push_back(e.predicate);
    REQUIRE(out.size() == 5);
    auto got = Retriever().topk("Find the Olympic games that Ronny represented as a mascot.", out, 5);
    std::sort(got.begin(), got.end());
    std::sort(out.begin(), out.end());
    CHECK(got == out);
}

TEST_CASE("embedding: hashing provider is deterministic and normalised")
{
    HashingEmbeddingProvider p(64);
    const std::vector<std::string> texts = {"olympic games", "olympic games", "rocket engine"};
    const auto v = p.embed(texts);
    REQUIRE(v.size() == 3);
    CHECK(v[0] == v[1]);
    double norm = 0;
    for (float x : v[2])
        norm += x * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0));
    CHECK(v[0].size() == 64);

    const Retriever r(std::make_shared<HashingEmbeddingProvider>(256));
    const std::vector<std::string> c = {"type.object.name", "olympics.olympic_mascot.olympic_games"};
    const auto ranked = r.rank("olympic games mascot", c);
    CHECK(ranked[0].name == "olympics.olympic_mascot.olympic_games");
    CHECK(ranked[0].source == RetrievalMode::Embedding);
    for (const auto& s : ranked)
        CHECK((s.score >= -1.0 && s.score <= 1.0));
}

TEST_CASE("embedding: provider errors propagate")
{
    const Retriever r(std::make_shared<FailingProvider>());
    const std::vector<std::string> c = {"a.b"};
    try {
        (void)r.rank("q", c);
        FAIL("expected ProviderError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ProviderError);
        CHECK(std::string(e.what()).find("backend unavailable") != std::string::npos);
    }
}

TEST_CASE("cache: hits, eviction and concurrent use")
{
    auto inner = std::make_shared<CountingProvider>();
    CachingEmbeddingProvider cache(inner, 2);
    const std::vector<std::string> ab = {"a", "b"};
    (void)cache.embed(ab);
    (void)cache.embed(ab);
    CHECK(inner->calls == 2);
    CHECK(cache.hits() == 2);
    const std::vector<std::string> c = {"c"};
    (void)cache.embed(c); // evicts "a"
    CHECK(cache.size() == 2);
    const std::vector<std::string> a = {"a"};
    (void)cache.embed(a);
    CHECK(inner->calls == 4);

    auto shared = std::make_shared<CachingEmbeddingProvider>(std::make_shared<HashingEmbeddingProvider>(32), 100);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&] {
            for (int i = 0; i < 50; ++i) {
                const std::vector<std::string> texts = {"text " + std::to_string(i % 10)};
                (void)shared->embed(texts);
            }
        });
    for (auto& t : threads)
        t.join();
    CHECK(shared->size() == 10);
}

TEST_CASE("property: topk is a prefix of rank and stable under insertion")
{
    const auto names = testing::fixture_graph().schema().relation_names();
    const Retriever r;
    for (const char* q : {"rocket engine dry mass", "dishes of cuisine", "olympic mascot", "song"}) {
        const auto ranked = r.rank(q, names);
        for (std::size_t k = 1; k <= names.size(); ++k) {
            const auto top = r.topk(q, names, k);
            REQUIRE(top.size() == k);
            for (std::size_t i = 0; i < k; ++i)
                CHECK(top[i] == ranked[i].name);
        }
        CHECK(r.topk(q, names, 5) == r.topk(q, names, 5));

        std::vector<std::string> without(names.begin() + 1, names.end());
        const auto before = r.topk(q, without, 5);
        const auto after = r.topk(q, names, 5);
        std::vector<std::string> pruned;
        for (const auto& n : after)
            if (n != names.front())
                pruned.push_back(n);
        // Dropping the inserted name leaves a prefix of the old list.
        CHECK(std::equal(pruned.begin(), pruned.end(), before.begin()));
    }
}
