// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <kgqa/decompose.hpp>
#include <kgqa/error.hpp>
#include <kgqa/pipeline.hpp>
#include <kgqa/schema.hpp>
#include <kgqa/sparql.hpp>
#include <kgqa/synth.hpp>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <iostream>
#include <random>

namespace kgqa::cli {

namespace {

struct SexprArgs {
    std::string expr;
    std::size_t count = 10;
    int max_depth = 3;
    std::optional<fs::path> emit_graph;
};

std::string expression_text(const std::string& arg)
{
    std::error_code ec;
    if (!arg.empty() && arg.front() != '(' && fs::is_regular_file(arg, ec)) {
        std::string text = read_text(arg);
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' '))
            text.pop_back();
        return text;
    }
    return arg;
}

void print_denotation(const Denotation& d)
{
    if (d.is_count()) {
        std::cout << d.count() << '\n';
    } else if (d.is_entities()) {
        for (const auto& e : d.entities())
            std::cout << e << '\n';
    } else {
        for (const auto& [a, b] : d.pairs())
            std::cout << a << '\t' << b << '\n';
    }
}

void write_graph(const fs::path& dir, const KnowledgeGraph& graph)
{
    fs::create_directories(dir);
    write_text(dir / "schema.json", graph.schema().to_json().dump(2) + "\n");
    std::string triples;
    for (const auto& t : graph.triples())
        triples += fmt::format("{}\t{}\t{}\n", t.subject, t.predicate, t.object);
    write_text(dir / "triples.tsv", triples);
}

} // namespace

void register_sexpr(CLI::App& app, Overrides& o)
{
    auto* sexpr = app.add_subcommand("sexpr", "Parse, print, evaluate, compile, decompose or generate logical forms");
    sexpr->require_subcommand(1);
    auto args = std::make_shared<SexprArgs>();

    const auto with_expr = [&, args](CLI::App* cmd) {
        cmd->add_option("--expr", args->expr, "Logical form text, or a file holding it")->required();
        add_common_options(*cmd, o);
        add_kg_options(*cmd, o);
    };

    auto* parse = sexpr->add_subcommand("parse", "Print the syntax tree");
    with_expr(parse);
    parse->callback([args] { std::cout << dump_ast(parse_sexpr(expression_text(args->expr))); });

    auto* print = sexpr->add_subcommand("print", "Print the canonical form");
    with_expr(print);
    print->callback([args] { std::cout << print_sexpr(canonicalize(parse_sexpr(expression_text(args->expr)))) << '\n'; });

    auto* eval = sexpr->add_subcommand("eval", "Evaluate over the in-memory graph");
    with_expr(eval);
    eval->callback([args, &o] {
        const Expr e = parse_sexpr(expression_text(args->expr));
        const KnowledgeGraph graph = require_graph(resolve_settings(o));
        print_denotation(evaluate(e, graph));
    });

    auto* compile = sexpr->add_subcommand("compile", "Print the SPARQL query");
    with_expr(compile);
    compile->callback([args, &o] {
        const Expr e = parse_sexpr(expression_text(args->expr));
        const SchemaView schema = require_schema(resolve_settings(o));
        std::cout << compile_sparql(e, schema);
    });

    auto* decompose = sexpr->add_subcommand("decompose", "Print the Task/Step lines");
    with_expr(decompose);
    decompose->callback([args, &o] {
        const Expr e = parse_sexpr(expression_text(args->expr));
        const SchemaView schema = require_schema(resolve_settings(o));
        std::cout << decomposition_lines(decompose_by_ops(bind(e, schema), schema));
    });

    auto* generate = sexpr->add_subcommand("generate", "Print random well-typed forms");
    add_common_options(*generate, o);
    add_kg_options(*generate, o);
    generate->add_option("--count", args->count, "Number of forms");
    generate->add_option("--max-depth", args->max_depth, "Maximum nesting depth");
    generate->add_option("--emit-graph", args->emit_graph, "Write the random graph used to this directory");
    generate->callback([args, &o] {
        const Settings s = resolve_settings(o);
        std::mt19937_64 rng(s.seed);
        const KnowledgeGraph graph = s.triples ? require_graph(s) : random_graph(rng);
        if (args->emit_graph)
            write_graph(*args->emit_graph, graph);
        RandomExprOptions opts;
        opts.max_depth = args->max_depth;
        for (std::size_t i = 0; i < args->count; ++i)
            std::cout << print_sexpr(random_expr(rng, graph, opts)) << '\n';
    });
}

} // namespace kgqa::cli
