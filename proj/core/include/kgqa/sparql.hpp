// SPDX-License-Identifier: Apache-2.0
//
// Compilation of logical forms to SPARQL, a small in-memory engine for the
// SPARQL subset the compiler emits, and a client for remote endpoints.
#pragma once

#include "kgqa/graph.hpp"
#include "kgqa/schema.hpp"
#include "kgqa/sexpr.hpp"

#include <chrono>
#include <string>
#include <string_view>

namespace kgqa {

inline constexpr std::string_view kFreebaseNs = "http://rdf.freebase.com/ns/";
inline constexpr std::string_view kTypePredicate = "type.object.type";

/// SELECT DISTINCT over ?x0 (or a COUNT(DISTINCT ?x0) aggregate). Comparatives
/// become FILTERs; ARGMAX/ARGMIN become a MAX/MIN sub-select joined by an
/// equality FILTER so ties are all returned. Class atoms use `type.object.type`.
/// Throws TypeMismatch / UnsupportedForm / UnboundAtom.
[[nodiscard]] std::string compile_sparql(const Expr& expr, const SchemaView& schema);

/// Runs a query produced by compile_sparql against the graph with a
/// triple-pattern matcher of its own. Throws QueryParseError.
[[nodiscard]] Denotation execute_sparql(std::string_view query, const KnowledgeGraph& graph);

/// Converts a standard SPARQL JSON results document into a denotation: a
/// single-binding COUNT result becomes a count, anything else the set of
/// values of the first projected variable.
[[nodiscard]] Denotation denotation_from_sparql_json(std::string_view body);

/// POSTs queries (application/sparql-query) to an HTTP endpoint.
class SparqlEndpoint {
public:
    explicit SparqlEndpoint(std::string url, std::chrono::seconds timeout = std::chrono::seconds(60));

    /// Throws ProviderError on transport or HTTP failures.
    [[nodiscard]] Denotation query(const std::string& sparql) const;

private:
    std::string url_;
    std::chrono::seconds timeout_;
};

} // namespace kgqa
