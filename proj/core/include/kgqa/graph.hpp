// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "kgqa/decimal.hpp"
#include "kgqa/schema.hpp"
#include "kgqa/sexpr.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace kgqa {

/// Objects are entity ids or literal terms `lexical^^<datatype IRI>`.
struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct Edge {
    std::string predicate;
    std::string node;
};

[[nodiscard]] bool is_literal_term(std::string_view term) noexcept;
/// Numeric value of a literal term with a numeric datatype.
[[nodiscard]] std::optional<Decimal> numeric_value(std::string_view term);
/// Canonical term for an object column: literals get their datatype expanded
/// and surrounding quotes removed.
[[nodiscard]] std::string normalize_term(std::string_view term);

/// Reads `subject<TAB>predicate<TAB>object` lines; `#` lines and blank lines
/// are skipped. Throws ParseError carrying the 1-based line number.
std::vector<Triple> parse_triples(std::istream& in);

class KnowledgeGraph {
public:
    /// Throws SchemaViolation listing every predicate missing from the schema.
    KnowledgeGraph(SchemaView schema, std::vector<Triple> triples);

    [[nodiscard]] const SchemaView& schema() const noexcept { return schema_; }
    [[nodiscard]] const std::vector<Triple>& triples() const noexcept { return triples_; }

    [[nodiscard]] std::span<const Edge> outgoing(std::string_view node) const;
    [[nodiscard]] std::span<const Edge> incoming(std::string_view node) const;
    [[nodiscard]] std::span<const std::pair<std::string, std::string>> pairs(std::string_view relation) const;
    [[nodiscard]] const std::set<std::string>& nodes() const noexcept { return nodes_; }

private:
    SchemaView schema_;
    std::vector<Triple> triples_;
    std::unordered_map<std::string, std::vector<Edge>> out_;
    std::unordered_map<std::string, std::vector<Edge>> in_;
    std::unordered_map<std::string, std::vector<std::pair<std::string, std::string>>> by_relation_;
    std::set<std::string> nodes_;
};

KnowledgeGraph load_graph(const std::filesystem::path& triples, const std::filesystem::path& schema);

using EntitySet = std::set<std::string>;
using PairSet = std::set<std::pair<std::string, std::string>>;

class Denotation {
public:
    Denotation() = default;
    explicit Denotation(EntitySet s) : value_(std::move(s)) {}
    explicit Denotation(PairSet s) : value_(std::move(s)) {}
    explicit Denotation(std::int64_t n) : value_(n) {}

    [[nodiscard]] bool is_entities() const noexcept { return std::holds_alternative<EntitySet>(value_); }
    [[nodiscard]] bool is_pairs() const noexcept { return std::holds_alternative<PairSet>(value_); }
    [[nodiscard]] bool is_count() const noexcept { return std::holds_alternative<std::int64_t>(value_); }

    [[nodiscard]] const EntitySet& entities() const { return std::get<EntitySet>(value_); }
    [[nodiscard]] const PairSet& pairs() const { return std::get<PairSet>(value_); }
    [[nodiscard]] std::int64_t count() const { return std::get<std::int64_t>(value_); }

    /// Answer set used for scoring: entities, a COUNT as its decimal string,
    /// or the first elements of a pair set.
    [[nodiscard]] EntitySet answers() const;
    [[nodiscard]] std::string summary(std::size_t max_items = 10) const;

    friend bool operator==(const Denotation&, const Denotation&) = default;

private:
    std::variant<EntitySet, PairSet, std::int64_t> value_;
};

/// Set semantics of the logical-form operators over `graph`. Symbols are bound
/// against the graph schema first. Throws TypeMismatch / UnboundAtom / UnboundRef.
[[nodiscard]] Denotation evaluate(const Expr& expr, const KnowledgeGraph& graph);

} // namespace kgqa
