// SPDX-License-Identifier: Apache-2.0
//
// Seeded random knowledge graphs and well-typed logical forms, for property
// tests, benchmarks and `sexpr generate`.
#pragma once

#include "kgqa/graph.hpp"
#include "kgqa/sexpr.hpp"

#include <cstddef>
#include <cstdint>
#include <random>

namespace kgqa {

struct RandomGraphOptions {
    std::size_t entities = 40;   // capped at 50
    std::size_t classes = 5;     // plus one mediator class
    std::size_t relations = 8;   // entity-valued, one of them leads to the mediator
    std::size_t attributes = 2;  // numeric, at most one value per entity
    double density = 0.08;       // probability of an edge between a domain and a range instance
};

[[nodiscard]] KnowledgeGraph random_graph(std::mt19937_64& rng, const RandomGraphOptions& options = {});

struct RandomExprOptions {
    int max_depth = 3;
    double count_probability = 0.1;
};

/// A bound, Ref-free form over `graph`'s schema. Relations are picked so that
/// their far end matches the operand's class whenever the schema allows it.
[[nodiscard]] Expr random_expr(std::mt19937_64& rng, const KnowledgeGraph& graph,
                               const RandomExprOptions& options = {});

} // namespace kgqa
