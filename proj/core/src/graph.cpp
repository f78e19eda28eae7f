// SPDX-License-Identifier: Apache-2.0
#include "kgqa/graph.hpp"

#include "kgqa/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <optional>

namespace kgqa {

bool is_literal_term(std::string_view term) noexcept
{
    return term.find("^^") != std::string_view::npos;
}

std::optional<Decimal> numeric_value(std::string_view term)
{
    const auto sep = term.find("^^");
    if (sep == std::string_view::npos)
        return std::nullopt;
    if (!is_numeric_datatype(term.substr(sep + 2)))
        return std::nullopt;
    return Decimal::parse(term.substr(0, sep));
}

std::string normalize_term(std::string_view term)
{
    const auto sep = term.find("^^");
    if (sep == std::string_view::npos)
        return std::string(term);
    std::string_view lexical = term.substr(0, sep);
    if (lexical.size() >= 2 && lexical.front() == '"' && lexical.back() == '"')
        lexical = lexical.substr(1, lexical.size() - 2);
    return literal_term(lexical, term.substr(sep + 2));
}

std::vector<Triple> parse_triples(std::istream& in)
{
    std::vector<Triple> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos)
            throw Error(ErrorCode::ParseError, "expected exactly three tab-separated fields", line_no);
        Triple t{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), normalize_term(line.substr(t2 + 1))};
        if (t.subject.empty() || t.predicate.empty() || t.object.empty())
            throw Error(ErrorCode::ParseError, "empty field", line_no);
        if (is_literal_term(t.subject))
            throw Error(ErrorCode::ParseError, "subject cannot be a literal", line_no);
        out.push_back(std::move(t));
    }
    return out;
}

KnowledgeGraph::KnowledgeGraph(SchemaView schema, std::vector<Triple> triples)
    : schema_(std::move(schema)), triples_(std::move(triples))
{
    std::sort(triples_.begin(), triples_.end());
    triples_.erase(std::unique(triples_.begin(), triples_.end()), triples_.end());

    std::vector<std::string> unknown;
    for (const auto& t : triples_)
        if (!schema_.relation(t.predicate) && std::find(unknown.begin(), unknown.end(), t.predicate) == unknown.end())
            unknown.push_back(t.predicate);
    if (!unknown.empty()) {
        std::string names = unknown.front();
        for (std::size_t i = 1; i < unknown.size(); ++i)
            names += ", " + unknown[i];
        throw Error(ErrorCode::SchemaViolation, fmt::format("predicates not declared in the schema: {}", names));
    }

    for (const auto& t : triples_) {
        out_[t.subject].push_back({t.predicate, t.object});
        in_[t.object].push_back({t.predicate, t.subject});
        by_relation_[t.predicate].emplace_back(t.subject, t.object);
        nodes_.insert(t.subject);
        nodes_.insert(t.object);
        schema_.add_entity(t.subject);
        if (!is_literal_term(t.object))
            schema_.add_entity(t.object);
    }
}

std::span<const Edge> KnowledgeGraph::outgoing(std::string_view node) const
{
    const auto it = out_.find(std::string(node));
    return it == out_.end() ? std::span<const Edge>{} : std::span<const Edge>(it->second);
}

std::span<const Edge> KnowledgeGraph::incoming(std::string_view node) const
{
    const auto it = in_.find(std::string(node));
    return it == in_.end() ? std::span<const Edge>{} : std::span<const Edge>(it->second);
}

std::span<const std::pair<std::string, std::string>> KnowledgeGraph::pairs(std::string_view relation) const
{
    const auto it = by_relation_.find(std::string(relation));
    if (it == by_relation_.end())
        return {};
    return it->second;
}

KnowledgeGraph load_graph(const std::filesystem::path& triples_path, const std::filesystem::path& schema_path)
{
    SchemaView schema = load_schema(schema_path);
    std::ifstream in(triples_path);
    if (!in)
        throw Error(ErrorCode::IoError, fmt::format("cannot open triples file '{}'", triples_path.string()));
    return KnowledgeGraph(std::move(schema), parse_triples(in));
}

EntitySet Denotation::answers() const
{
    if (is_entities())
        return entities();
    if (is_count())
        return {std::to_string(count())};
    EntitySet out;
    for (const auto& [x, _] : pairs())
        out.insert(x);
    return out;
}

std::string Denotation::summary(std::size_t max_items) const
{
    if (is_count())
        return std::to_string(count());
    std::vector<std::string> items;
    std::size_t total = 0;
    if (is_entities()) {
        total = entities().size();
        for (const auto& e : entities()) {
            if (items.size() == max_items)
                break;
            items.push_back(e);
        }
    } else {
        total = pairs().size();
        for (const auto& [a, b] : pairs()) {
            if (items.size() == max_items)
                break;
            items.push_back(fmt::format("({}, {})", a, b));
        }
    }
    std::string out = "[" + fmt::format("{}", fmt::join(items, ", "));
    if (total > items.size())
        out += fmt::format(", ... ({} total)", total);
    return out + "]";
}

namespace {

class Evaluator {
public:
    explicit Evaluator(const KnowledgeGraph& graph) : graph_(graph) {}

    Denotation eval(const Expr& e)
    {
        switch (value_kind(e)) {
        case ValueKind::Number: return Denotation(static_cast<std::int64_t>(unary(e.args[0]).size()));
        case ValueKind::Binary: return Denotation(binary(e));
        default: return Denotation(unary(e));
        }
    }

private:
    const KnowledgeGraph& graph_;

    [[noreturn]] static void mismatch(const Expr& e, std::string_view want)
    {
        throw Error(ErrorCode::TypeMismatch, fmt::format("{} does not denote {}", print_sexpr(e), want));
    }

    EntitySet unary(const Expr& e)
    {
        switch (e.op) {
        case Op::Entity: return {e.name};
        case Op::Literal: return {literal_term(e.name, e.datatype)};
        case Op::Class: return graph_.schema().instances_of(e.name);
        case Op::And: {
            const EntitySet a = unary(e.args[0]);
            const EntitySet b = unary(e.args[1]);
            EntitySet out;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
            return out;
        }
        case Op::Join: {
            if (value_kind(e.args[1]) == ValueKind::Binary)
                mismatch(e, "an entity set");
            return join(e.args[0], unary(e.args[1]));
        }
        case Op::ArgMax:
        case Op::ArgMin: return extremum(unary(e.args[0]), binary(e.args[1]), e.op == Op::ArgMax);
        case Op::Lt:
        case Op::Le:
        case Op::Gt:
        case Op::Ge: return compare(e);
        case Op::Ref: throw Error(ErrorCode::UnboundRef, fmt::format("'{}' must be substituted before evaluation", e.name));
        case Op::Symbol: throw Error(ErrorCode::UnboundAtom, fmt::format("'{}' is not bound to the schema", e.name));
        default: mismatch(e, "an entity set");
        }
    }

    PairSet binary(const Expr& e)
    {
        switch (e.op) {
        case Op::Relation: {
            const auto p = graph_.pairs(e.name);
            return PairSet(p.begin(), p.end());
        }
        case Op::Reverse: {
            PairSet out;
            for (const auto& [x, y] : binary(e.args[0]))
                out.emplace(y, x);
            return out;
        }
        case Op::Join: {
            if (value_kind(e.args[1]) != ValueKind::Binary)
                mismatch(e, "a binary relation");
            const PairSet left = binary(e.args[0]);
            const PairSet right = binary(e.args[1]);
            std::unordered_map<std::string, std::vector<const std::string*>> by_first;
            for (const auto& [y, z] : right)
                by_first[y].push_back(&z);
            PairSet out;
            for (const auto& [x, y] : left) {
                const auto it = by_first.find(y);
                if (it == by_first.end())
                    continue;
                for (const auto* z : it->second)
                    out.emplace(x, *z);
            }
            return out;
        }
        case Op::Symbol: throw Error(ErrorCode::UnboundAtom, fmt::format("'{}' is not bound to the schema", e.name));
        case Op::Ref: throw Error(ErrorCode::UnboundRef, fmt::format("'{}' must be substituted before evaluation", e.name));
        default: mismatch(e, "a binary relation");
        }
    }

    // {x | (x, y) in b, y in u}
    EntitySet join(const Expr& b, const EntitySet& u)
    {
        EntitySet out;
        if (b.op == Op::Relation) {
            for (const auto& y : u)
                for (const auto& edge : graph_.incoming(y))
                    if (edge.predicate == b.name)
                        out.insert(edge.node);
            return out;
        }
        if (b.op == Op::Reverse && b.args[0].op == Op::Relation) {
            for (const auto& y : u)
                for (const auto& edge : graph_.outgoing(y))
                    if (edge.predicate == b.args[0].name)
                        out.insert(edge.node);
            return out;
        }
        for (const auto& [x, y] : binary(b))
            if (u.contains(y))
                out.insert(x);
        return out;
    }

    static EntitySet extremum(const EntitySet& u, const PairSet& b, bool maximum)
    {
        // An entity's score is its best value; entities without a numeric value are skipped.
        std::map<std::string, Decimal> score;
        for (const auto& [x, y] : b) {
            if (!u.contains(x))
                continue;
            const auto v = numeric_value(y);
            if (!v)
                continue;
            auto [it, inserted] = score.try_emplace(x, *v);
            if (!inserted && (maximum ? *v > it->second : *v < it->second))
                it->second = *v;
        }
        if (score.empty())
            return {};
        std::optional<Decimal> best;
        for (const auto& [_, v] : score)
            if (!best || (maximum ? v > *best : v < *best))
                best = v;
        EntitySet out;
        for (const auto& [x, v] : score)
            if (v == *best)
                out.insert(x);
        return out;
    }

    EntitySet compare(const Expr& e)
    {
        const Expr& lit = e.args[1];
        const auto bound = Decimal::parse(lit.name);
        if (lit.op != Op::Literal || !is_numeric_datatype(lit.datatype) || !bound)
            throw Error(ErrorCode::TypeMismatch, fmt::format("{} needs a numeric literal", op_name(e.op)));
        EntitySet out;
        for (const auto& [x, y] : binary(e.args[0])) {
            const auto v = numeric_value(y);
            if (!v)
                continue;
            bool keep = false;
            switch (e.op) {
            case Op::Lt: keep = *v < *bound; break;
            case Op::Le: keep = *v <= *bound; break;
            case Op::Gt: keep = *v > *bound; break;
            default: keep = *v >= *bound; break;
            }
            if (keep)
                out.insert(x);
        }
        return out;
    }
};

} // namespace

Denotation evaluate(const Expr& expr, const KnowledgeGraph& graph)
{
    if (has_refs(expr)) {
        const auto refs = collect_refs(expr);
        throw Error(ErrorCode::UnboundRef, fmt::format("'{}' must be substituted before evaluation", refs.front()));
    }
    return Evaluator(graph).eval(bind(expr, graph.schema()));
}

} // namespace kgqa
