// SPDX-License-Identifier: Apache-2.0
//
// The logical-form language: AND, COUNT, R, JOIN, ARGMAX, ARGMIN and the four
// numeric comparatives over entity, class, relation and literal atoms, plus
// `s-exp-<task>[.<step>]` references used by step-wise reasoning traces.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgqa {

enum class Op : std::uint8_t {
    // atoms
    Entity,
    Class,
    Relation,
    Literal,
    Ref,
    Symbol, // atom whose entity/class/relation role is decided by schema binding
    // operators
    And,
    Count,
    Reverse,
    Join,
    ArgMax,
    ArgMin,
    Lt,
    Le,
    Gt,
    Ge,
};

std::string_view op_name(Op op) noexcept;

[[nodiscard]] constexpr bool is_atom(Op op) noexcept { return op <= Op::Symbol; }
[[nodiscard]] constexpr bool is_comparative(Op op) noexcept { return op >= Op::Lt && op <= Op::Ge; }

struct Expr {
    Op op = Op::Symbol;
    std::string name;     // atom text, ref id, or literal lexical form
    std::string datatype; // literals only, as written
    std::vector<Expr> args;

    static Expr entity(std::string id) { return {Op::Entity, std::move(id), {}, {}}; }
    static Expr klass(std::string id) { return {Op::Class, std::move(id), {}, {}}; }
    static Expr relation(std::string id) { return {Op::Relation, std::move(id), {}, {}}; }
    static Expr symbol(std::string id) { return {Op::Symbol, std::move(id), {}, {}}; }
    static Expr ref(std::string id) { return {Op::Ref, std::move(id), {}, {}}; }
    static Expr literal(std::string lexical, std::string datatype)
    {
        return {Op::Literal, std::move(lexical), std::move(datatype), {}};
    }
    static Expr node(Op op, std::vector<Expr> args) { return {op, {}, {}, std::move(args)}; }

    [[nodiscard]] bool atom() const noexcept { return is_atom(op); }

    friend bool operator==(const Expr&, const Expr&) = default;
};

/// Reference ids `s-exp-<task>` and `s-exp-<task>.<step>`.
struct RefId {
    int task = 0;
    std::optional<int> step;

    static std::optional<RefId> parse(std::string_view text);
    [[nodiscard]] std::string str() const;
    friend auto operator<=>(const RefId&, const RefId&) = default;
};

using RefBindings = std::map<std::string, Expr, std::less<>>;

[[nodiscard]] bool is_entity_id(std::string_view text) noexcept;

/// Datatype IRI with the `xsd:` prefix expanded.
[[nodiscard]] std::string normalize_datatype(std::string_view datatype);
[[nodiscard]] bool is_numeric_datatype(std::string_view datatype);
/// The KG term string for a literal: `lexical^^<full datatype IRI>`.
[[nodiscard]] std::string literal_term(std::string_view lexical, std::string_view datatype);

/// Throws Error{SyntaxError | ArityError | TypeMismatch}.
[[nodiscard]] Expr parse_sexpr(std::string_view text);
[[nodiscard]] std::string print_sexpr(const Expr& expr);
/// Indented one-node-per-line tree, for inspection.
[[nodiscard]] std::string dump_ast(const Expr& expr);

[[nodiscard]] bool has_refs(const Expr& expr);
[[nodiscard]] std::vector<std::string> collect_refs(const Expr& expr);

/// Splices bindings for every Ref, recursively. Throws UnboundRef / CyclicRef.
[[nodiscard]] Expr substitute_refs(const Expr& expr, const RefBindings& bindings);

/// AND operands sorted by printed form, double reversal removed, and R pushed
/// down to relation atoms.
[[nodiscard]] Expr canonicalize(const Expr& expr);
[[nodiscard]] bool semantic_equal(const Expr& a, const Expr& b);

enum class ValueKind { Unary, Binary, Number, Unknown };

/// Syntactic value kind; Symbols and Refs whose role is undecided yield Unknown.
[[nodiscard]] ValueKind value_kind(const Expr& expr) noexcept;

/// Relation atoms and class (or unresolved unary) atoms mentioned by the form.
struct SchemaItems {
    std::vector<std::string> relations;
    std::vector<std::string> classes;
};
[[nodiscard]] SchemaItems schema_items(const Expr& expr);

} // namespace kgqa
