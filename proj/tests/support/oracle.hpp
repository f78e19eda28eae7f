// SPDX-License-Identifier: Apache-2.0
//
// Brute-force set semantics over a flat triple list. Shares no code with the
// library evaluator: every operator rescans the raw data.
#pragma once

#include <kgqa/graph.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Kb {
    std::vector<kgqa::Triple> triples;
    std::map<std::string, std::set<std::string>> members; // class -> entities

    static Kb from(const kgqa::KnowledgeGraph& graph);
};

struct Value {
    enum Kind { Unary, Binary, Count } kind = Unary;
    std::set<std::string> unary;
    std::set<std::pair<std::string, std::string>> binary;
    std::int64_t count = 0;

    friend bool operator==(const Value&, const Value&) = default;
};

/// Throws std::runtime_error on ill-typed input.
Value eval(const kgqa::Expr& expr, const Kb& kb);

/// Same shape as the library denotation, for direct comparison.
bool same(const Value& v, const kgqa::Denotation& d);

} // namespace oracle
