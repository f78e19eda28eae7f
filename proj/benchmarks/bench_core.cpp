// SPDX-License-Identifier: Apache-2.0
#include <kgqa/graph.hpp>
#include <kgqa/retrieval.hpp>
#include <kgqa/sparql.hpp>
#include <kgqa/synth.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace kgqa;

namespace {

struct Corpus {
    KnowledgeGraph graph;
    std::vector<Expr> forms;
    std::vector<std::string> texts;
};

const Corpus& corpus()
{
    static const Corpus c = [] {
        std::mt19937_64 rng(42);
        RandomGraphOptions g;
        g.entities = 50;
        g.density = 0.12;
        Corpus out{random_graph(rng, g), {}, {}};
        RandomExprOptions e;
        e.max_depth = 4;
        for (int i = 0; i < 256; ++i) {
            out.forms.push_back(random_expr(rng, out.graph, e));
            out.texts.push_back(print_sexpr(out.forms.back()));
        }
        return out;
    }();
    return c;
}

void BM_Parse(benchmark::State& state)
{
    const auto& c = corpus();
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(parse_sexpr(c.texts[i++ % c.texts.size()]));
}
BENCHMARK(BM_Parse);

void BM_Print(benchmark::State& state)
{
    const auto& c = corpus();
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(print_sexpr(c.forms[i++ % c.forms.size()]));
}
BENCHMARK(BM_Print);

void BM_Evaluate(benchmark::State& state)
{
    const auto& c = corpus();
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(evaluate(c.forms[i++ % c.forms.size()], c.graph));
}
BENCHMARK(BM_Evaluate);

void BM_CompileSparql(benchmark::State& state)
{
    const auto& c = corpus();
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(compile_sparql(c.forms[i++ % c.forms.size()], c.graph.schema()));
}
BENCHMARK(BM_CompileSparql);

void BM_ExecuteSparql(benchmark::State& state)
{
    const auto& c = corpus();
    std::vector<std::string> queries;
    for (const auto& f : c.forms)
        queries.push_back(compile_sparql(f, c.graph.schema()));
    std::size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(execute_sparql(queries[i++ % queries.size()], c.graph));
}
BENCHMARK(BM_ExecuteSparql);

std::vector<std::string> candidates(std::size_t n)
{
    static const char* words[] = {"olympic", "games", "mascot", "comet", "group", "rocket", "engine", "dish",
                                  "cuisine", "developer", "song", "disease", "cause", "mass", "fuel"};
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, std::size(words) - 1);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(std::string("base.") + words[pick(rng)] + "." + words[pick(rng)] + "_" + std::to_string(i));
    return out;
}

void BM_LexicalTopk(benchmark::State& state)
{
    const auto c = candidates(static_cast<std::size_t>(state.range(0)));
    const Retriever r;
    for (auto _ : state)
        benchmark::DoNotOptimize(r.topk("which rocket engine uses this fuel", c, 5));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LexicalTopk)->Arg(100)->Arg(1000);

void BM_HashingTopk(benchmark::State& state)
{
    const auto c = candidates(static_cast<std::size_t>(state.range(0)));
    const Retriever r(std::make_shared<HashingEmbeddingProvider>());
    for (auto _ : state)
        benchmark::DoNotOptimize(r.topk("which rocket engine uses this fuel", c, 5));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HashingTopk)->Arg(100)->Arg(1000);

} // namespace

BENCHMARK_MAIN();
