// SPDX-License-Identifier: Apache-2.0
#include "kgqa/synth.hpp"

#include "kgqa/schema.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <string>
#include <vector>

namespace kgqa {

namespace {

constexpr const char* kMediator = "synth.cvt";

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items)
{
    return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

} // namespace

KnowledgeGraph random_graph(std::mt19937_64& rng, const RandomGraphOptions& options)
{
    const std::size_t n_entities = std::clamp<std::size_t>(options.entities, 2, 50);
    const std::size_t n_classes = std::clamp<std::size_t>(options.classes, 1, n_entities);
    const std::size_t n_relations = std::clamp<std::size_t>(options.relations, 1, 12);
    const std::size_t n_attributes = std::min<std::size_t>(options.attributes, 12 - std::min<std::size_t>(n_relations, 11));

    SchemaView schema;
    std::vector<std::string> classes;
    for (std::size_t i = 0; i < n_classes; ++i) {
        classes.push_back(fmt::format("synth.class_{}", i));
        schema.add_class({classes.back(), fmt::format("Synthetic class {}.", i), false});
    }
    schema.add_class({kMediator, "Synthetic mediator.", true});

    std::map<std::string, std::vector<std::string>> members;
    std::vector<std::string> entities;
    for (std::size_t i = 0; i < n_entities; ++i) {
        const std::string id = fmt::format("m.synth{}", i);
        entities.push_back(id);
        schema.set_label(id, fmt::format("entity {}", i));
        const std::string& c = classes[i % classes.size()];
        schema.add_instance(id, c);
        members[c].push_back(id);
        if (chance(rng, 0.2)) {
            const std::string& extra = pick(rng, classes);
            if (extra != c) {
                schema.add_instance(id, extra);
                members[extra].push_back(id);
            }
        }
    }

    std::vector<Triple> triples;
    std::size_t mediators = 0;
    for (std::size_t r = 0; r < n_relations; ++r) {
        RelationInfo info;
        info.name = fmt::format("synth.rel_{}", r);
        info.description = fmt::format("synthetic relation {}", r);
        info.domain = pick(rng, classes);
        if (r == 0 && n_relations > 1) {
            // entity -> mediator -> entity
            info.range = kMediator;
            info.mediator = true;
            const std::size_t hubs = std::max<std::size_t>(2, n_entities / 8);
            for (std::size_t m = 0; m < hubs; ++m) {
                const std::string cvt = fmt::format("m.cvt{}", mediators++);
                schema.add_instance(cvt, kMediator);
                triples.push_back({pick(rng, members[info.domain]), info.name, cvt});
            }
        } else if (r == 1 && mediators > 0) {
            info.domain = kMediator;
            info.range = pick(rng, classes);
            for (std::size_t m = 0; m < mediators; ++m)
                triples.push_back({fmt::format("m.cvt{}", m), info.name, pick(rng, members[info.range])});
        } else {
            info.range = pick(rng, classes);
            for (const auto& s : members[info.domain])
                for (const auto& o : members[info.range])
                    if (chance(rng, options.density))
                        triples.push_back({s, info.name, o});
        }
        schema.add_relation(info);
    }
    for (std::size_t a = 0; a < n_attributes; ++a) {
        RelationInfo info;
        info.name = fmt::format("synth.attr_{}", a);
        info.description = fmt::format("synthetic attribute {}", a);
        info.domain = pick(rng, classes);
        const bool integer = a % 2 == 0;
        info.range = integer ? "xsd:integer" : "xsd:float";
        for (const auto& s : members[info.domain]) {
            if (!chance(rng, 0.8))
                continue;
            const int v = std::uniform_int_distribution<int>(0, 60)(rng);
            const std::string lex = integer ? std::to_string(v) : fmt::format("{}.5", v);
            triples.push_back({s, info.name, literal_term(lex, info.range)});
        }
        schema.add_relation(info);
    }
    std::sort(triples.begin(), triples.end());
    triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
    return KnowledgeGraph(std::move(schema), std::move(triples));
}

namespace {

class ExprGenerator {
public:
    ExprGenerator(std::mt19937_64& rng, const KnowledgeGraph& graph) : rng_(rng), schema_(graph.schema())
    {
        for (const auto& r : schema_.relation_names())
            (schema_.is_attribute(r) ? attributes_ : relations_).push_back(r);
        for (const auto& c : schema_.class_names())
            if (!schema_.instances_of(c).empty())
                classes_.push_back(c);
        for (const auto& node : graph.nodes())
            if (!is_literal_term(node) && !schema_.classes_of(node).empty())
                entities_.push_back(node);
    }

    struct Typed {
        Expr expr;
        std::string type;
    };

    Typed unary(int depth)
    {
        if (depth <= 0)
            return leaf();
        switch (std::uniform_int_distribution<int>(0, 9)(rng_)) {
        case 0: return leaf();
        case 1:
        case 2:
        case 3: return join(depth, false);
        case 4:
        case 5: return join(depth, true);
        case 6: {
            Typed a = unary(depth - 1);
            Typed b = chance(rng_, 0.5) && !classes_.empty() ? Typed{Expr::klass(a.type), a.type} : unary(depth - 1);
            if (b.expr.op == Op::Class && !schema_.klass(b.type))
                b = leaf();
            return {Expr::node(Op::And, {std::move(a.expr), std::move(b.expr)}), a.type};
        }
        case 7:
            if (!attributes_.empty()) {
                Typed a = unary(depth - 1);
                const std::string attr = attribute_for(a.type);
                return {Expr::node(chance(rng_, 0.5) ? Op::ArgMax : Op::ArgMin,
                                   {std::move(a.expr), Expr::relation(attr)}),
                        a.type};
            }
            return leaf();
        case 8:
            if (!attributes_.empty()) {
                const std::string& attr = pick(rng_, attributes_);
                const RelationInfo* info = schema_.relation(attr);
                const Op ops[] = {Op::Lt, Op::Le, Op::Gt, Op::Ge};
                const Op op = ops[std::uniform_int_distribution<int>(0, 3)(rng_)];
                return {Expr::node(op, {Expr::relation(attr), literal(info->range)}), info->domain};
            }
            return leaf();
        default:
            if (!attributes_.empty()) {
                const std::string& attr = pick(rng_, attributes_);
                const RelationInfo* info = schema_.relation(attr);
                return {Expr::node(Op::Join, {Expr::relation(attr), literal(info->range)}), info->domain};
            }
            return leaf();
        }
    }

private:
    std::mt19937_64& rng_;
    const SchemaView& schema_;
    std::vector<std::string> relations_;
    std::vector<std::string> attributes_;
    std::vector<std::string> classes_;
    std::vector<std::string> entities_;

    Typed leaf()
    {
        if (!classes_.empty() && (entities_.empty() || chance(rng_, 0.25))) {
            const std::string& c = pick(rng_, classes_);
            return {Expr::klass(c), c};
        }
        const std::string& e = pick(rng_, entities_);
        const auto& cs = schema_.classes_of(e);
        return {Expr::entity(e), cs.empty() ? std::string() : *cs.begin()};
    }

    Expr literal(const std::string& datatype)
    {
        const int v = std::uniform_int_distribution<int>(0, 60)(rng_);
        const bool integer = normalize_datatype(datatype).ends_with("integer");
        return Expr::literal(integer ? std::to_string(v) : fmt::format("{}.0", v), normalize_datatype(datatype));
    }

    // (JOIN r X) walks r backwards from X; (JOIN (R r) X) walks forwards.
    Typed join(int depth, bool reverse)
    {
        Typed x = unary(depth - 1);
        std::vector<std::string> fitting;
        for (const auto& r : relations_) {
            const RelationInfo* info = schema_.relation(r);
            if ((reverse ? info->domain : info->range) == x.type)
                fitting.push_back(r);
        }
        const std::string& r = pick(rng_, fitting.empty() ? relations_ : fitting);
        const RelationInfo* info = schema_.relation(r);
        Expr rel = reverse ? Expr::node(Op::Reverse, {Expr::relation(r)}) : Expr::relation(r);
        return {Expr::node(Op::Join, {std::move(rel), std::move(x.expr)}), reverse ? info->range : info->domain};
    }

    std::string attribute_for(const std::string& type)
    {
        std::vector<std::string> fitting;
        for (const auto& a : attributes_)
            if (schema_.relation(a)->domain == type)
                fitting.push_back(a);
        return pick(rng_, fitting.empty() ? attributes_ : fitting);
    }
};

} // namespace

Expr random_expr(std::mt19937_64& rng, const KnowledgeGraph& graph, const RandomExprOptions& options)
{
    ExprGenerator gen(rng, graph);
    const int depth = std::uniform_int_distribution<int>(1, std::max(1, options.max_depth))(rng);
    Expr e = gen.unary(depth).expr;
    if (std::bernoulli_distribution(options.count_probability)(rng))
        e = Expr::node(Op::Count, {std::move(e)});
    return e;
}

} // namespace kgqa
