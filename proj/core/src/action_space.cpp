// SPDX-License-Identifier: Apache-2.0
#include "kgqa/action_space.hpp"

#include "kgqa/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <set>

namespace kgqa {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::string_view unquote(std::string_view s)
{
    s = trim(s);
    if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front())
        s = trim(s.substr(1, s.size() - 2));
    return s;
}

std::string strip_period(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.back() == '.')
        s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> numeric_attributes(const SchemaView& schema)
{
    std::vector<std::string> out;
    for (const auto& name : schema.attribute_names())
        if (is_numeric_datatype(schema.relation(name)->range))
            out.push_back(name);
    return out;
}

} // namespace

// ---- rendering ---------------------------------------------------------------

std::string render_list(const std::vector<std::string>& names)
{
    return fmt::format("[{}]", fmt::join(names, ", "));
}

std::string render_relations(std::string_view subject, const std::vector<std::string>& outgoing,
                             const std::vector<std::string>& incoming)
{
    return fmt::format("{} has following relations. The outgoing relations are {}. The incoming relations are {}.",
                       subject, render_list(outgoing), render_list(incoming));
}

std::string render_classes(std::string_view subject, const std::vector<std::string>& classes)
{
    return fmt::format("{} has following classes. The classes are {}.", subject, render_list(classes));
}

std::string render_relevant(std::string_view kind, const std::vector<std::string>& names)
{
    return fmt::format("The relevant {} are {}.", kind, fmt::join(names, ", "));
}

std::string render_variable(std::size_t id, std::string_view type)
{
    if (type.empty())
        return fmt::format("variable #{}", id);
    return fmt::format("variable #{}, which are instances of {}", id, type);
}

std::string render_count(std::size_t id, std::int64_t value)
{
    return fmt::format("variable #{}, which is a number: {}", id, value);
}

std::string render_action_error(const Error& error)
{
    return fmt::format("Error: {}", error.what());
}

std::vector<std::string> split_args(std::string_view text)
{
    std::vector<std::string> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '(')
            ++depth;
        else if (text[i] == ')')
            depth = std::max(0, depth - 1);
        else if (text[i] == ',' && depth == 0) {
            out.emplace_back(trim(text.substr(start, i - start)));
            start = i + 1;
        }
    }
    const auto last = trim(text.substr(start));
    if (!last.empty() || !out.empty())
        out.emplace_back(last);
    return out;
}

DescriptionRequest parse_description_request(std::string_view text)
{
    text = unquote(text);
    DescriptionRequest out;
    const auto open = text.find('(');
    if (open == std::string_view::npos) {
        out.name = std::string(text);
    } else {
        if (text.back() != ')')
            throw Error(ErrorCode::InvalidArgument, fmt::format("malformed description request '{}'", text));
        const auto flag = trim(text.substr(open + 1, text.size() - open - 2));
        out.name = std::string(unquote(text.substr(0, open)));
        if (flag == "outgoing")
            out.direction = RelationDirection::Outgoing;
        else if (flag == "incoming")
            out.direction = RelationDirection::Incoming;
        else
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("direction of '{}' must be 'outgoing' or 'incoming', got '{}'", out.name, flag));
    }
    if (out.name.empty())
        throw Error(ErrorCode::InvalidArgument, "empty schema item in get_descriptions");
    return out;
}

// ---- environment ---------------------------------------------------------------

const std::vector<std::string>& ActionEnvironment::action_names()
{
    static const std::vector<std::string> names = {
        "get_relations",     "get_relevant_relations", "get_classes",  "get_relevant_classes",
        "get_descriptions",  "get_neighbors",          "intersection", "get_attributes",
        "argmax",            "argmin",                 "count",        "lt",
        "le",                "gt",                     "ge",           "get_relevant_attributes",
    };
    return names;
}

ActionEnvironment::ActionEnvironment(const KnowledgeGraph& graph, Retriever retriever, std::size_t topk)
    : graph_(graph), retriever_(std::move(retriever)), topk_(topk)
{
    if (topk_ == 0)
        throw Error(ErrorCode::InvalidArgument, "topk must be at least 1");
}

const Variable& ActionEnvironment::variable(std::string_view id) const
{
    id = trim(id);
    std::size_t n = 0;
    bool ok = id.size() >= 2 && id.front() == '#';
    for (std::size_t i = 1; ok && i < id.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(id[i])))
            ok = false;
        else
            n = n * 10 + static_cast<std::size_t>(id[i] - '0');
    }
    if (!ok)
        throw Error(ErrorCode::UnknownVariable, fmt::format("'{}' is not a variable id", id));
    if (n >= variables_.size())
        throw Error(ErrorCode::UnknownVariable,
                    fmt::format("variable {} does not exist ({} defined so far)", id, variables_.size()));
    return variables_[n];
}

Expr ActionEnvironment::target_expr(std::string_view target) const
{
    return resolve(target).expr;
}

ActionEnvironment::Target ActionEnvironment::resolve(std::string_view raw) const
{
    const std::string_view text = unquote(raw);
    if (text.empty())
        throw Error(ErrorCode::ResolveError, "empty target");
    const SchemaView& schema = graph_.schema();

    auto from_expr = [&](Expr expr, std::string display) {
        Denotation d;
        try {
            d = evaluate(expr, graph_);
        } catch (const Error& e) {
            throw Error(ErrorCode::ResolveError, fmt::format("cannot evaluate '{}': {}", display, e.what()));
        }
        if (!d.is_entities())
            throw Error(ErrorCode::ResolveError, fmt::format("'{}' does not denote a set of entities", display));
        return Target{std::move(expr), d.entities(), std::move(display), {}};
    };

    if (RefId::parse(text)) {
        if (!refs_.contains(text))
            throw Error(ErrorCode::ResolveError, fmt::format("'{}' has not been defined yet", text));
        Expr expr;
        try {
            expr = substitute_refs(Expr::ref(std::string(text)), refs_);
        } catch (const Error& e) {
            throw Error(ErrorCode::ResolveError, e.what());
        }
        return from_expr(std::move(expr), std::string(text));
    }
    if (text.front() == '#') {
        const Variable& v = variable(text);
        if (!v.value.is_entities())
            throw Error(ErrorCode::ResolveError, fmt::format("{} does not denote a set of entities", text));
        return Target{v.expr, v.value.entities(), std::string(text), v.type};
    }
    if (text.front() == '(') {
        Expr expr;
        try {
            expr = substitute_refs(parse_sexpr(text), refs_);
        } catch (const Error& e) {
            throw Error(ErrorCode::ResolveError, fmt::format("cannot use '{}': {}", text, e.what()));
        }
        return from_expr(std::move(expr), std::string(text));
    }
    if (is_entity_id(text))
        return Target{Expr::entity(std::string(text)), {std::string(text)}, std::string(text), {}};
    if (auto mid = schema.entity_by_label(text))
        return Target{Expr::entity(*mid), {*mid}, std::string(text), {}};
    throw Error(ErrorCode::ResolveError, fmt::format("cannot resolve '{}' to an entity, variable or expression", text));
}

ActionEnvironment::Target ActionEnvironment::resolve_nonempty(std::string_view target) const
{
    Target t = resolve(target);
    if (t.members.empty())
        throw Error(ErrorCode::EmptyTarget, fmt::format("'{}' denotes an empty set of entities", t.display));
    return t;
}

std::vector<std::string> ActionEnvironment::filter(std::vector<std::string> names, std::size_t k) const
{
    if (names.empty())
        return names;
    return retriever_.topk(task_text().empty() ? std::string_view("relation") : std::string_view(task_text()), names,
                           k);
}

Observation ActionEnvironment::execute(std::string_view name, std::string_view raw_args)
{
    const std::string args(trim(raw_args));
    auto expect = [&](const std::vector<std::string>& parts, std::size_t n) {
        if (parts.size() != n)
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("{} takes {} argument{}, got {}", name, n, n == 1 ? "" : "s", parts.size()));
    };
    try {
        Observation obs;
        if (!allowed_.empty() && std::find(allowed_.begin(), allowed_.end(), name) == allowed_.end())
            throw Error(ErrorCode::UnknownAction,
                        fmt::format("'{}' is not available; use one of {}", name, fmt::join(allowed_, ", ")));
        const auto parts = split_args(args);
        if (name == "get_relations") {
            expect(parts, 1);
            obs = flat_relations_ ? baseline_get_relations(parts[0]) : get_relations(parts[0]);
        } else if (name == "get_relevant_relations") {
            obs = get_relevant_relations(args);
        } else if (name == "get_classes") {
            expect(parts, 1);
            obs = get_classes(parts[0]);
        } else if (name == "get_relevant_classes") {
            obs = get_relevant_classes(args);
        } else if (name == "get_descriptions") {
            std::vector<DescriptionRequest> items;
            for (const auto& p : parts)
                items.push_back(parse_description_request(p));
            obs = get_descriptions(items);
        } else if (name == "get_neighbors") {
            expect(parts, 2);
            obs = get_neighbors(parts[0], parts[1]);
        } else if (name == "intersection") {
            expect(parts, 2);
            obs = intersection(parts[0], parts[1]);
        } else if (name == "get_attributes") {
            expect(parts, 1);
            obs = get_attributes(parts[0]);
        } else if (name == "argmax" || name == "argmin") {
            expect(parts, 2);
            obs = name == "argmax" ? argmax(parts[0], parts[1]) : argmin(parts[0], parts[1]);
        } else if (name == "count") {
            expect(parts, 1);
            obs = count(parts[0]);
        } else if (name == "lt" || name == "le" || name == "gt" || name == "ge") {
            expect(parts, 2);
            const Op op = name == "lt" ? Op::Lt : name == "le" ? Op::Le : name == "gt" ? Op::Gt : Op::Ge;
            obs = comparative(op, parts[0], parts[1]);
        } else if (name == "get_relevant_attributes") {
            obs = get_relevant_attributes(args);
        } else {
            throw Error(ErrorCode::UnknownAction, fmt::format("unknown action '{}'", name));
        }
        log_.push_back({std::string(name), args, obs.text, false});
        return obs;
    } catch (const Error& e) {
        log_.push_back({std::string(name), args, render_action_error(e), true});
        throw;
    }
}

// ---- decomposition-driven functions ----------------------------------------------

Observation ActionEnvironment::get_relations(std::string_view target, std::optional<std::size_t> topk)
{
    const Target t = resolve_nonempty(target);
    std::set<std::string> out;
    std::set<std::string> in;
    for (const auto& m : t.members) {
        for (const auto& e : graph_.outgoing(m))
            out.insert(e.predicate);
        for (const auto& e : graph_.incoming(m))
            in.insert(e.predicate);
    }
    const std::size_t k = topk.value_or(topk_);
    Observation obs;
    obs.outgoing = filter({out.begin(), out.end()}, k);
    obs.incoming = filter({in.begin(), in.end()}, k);
    obs.text = render_relations(t.display, obs.outgoing, obs.incoming);
    return obs;
}

Observation ActionEnvironment::get_relevant_relations(std::string_view task, std::optional<std::size_t> topk)
{
    task = unquote(task);
    if (task.empty())
        throw Error(ErrorCode::InvalidArgument, "get_relevant_relations needs a task description");
    Observation obs;
    obs.names = retriever_.topk(task, graph_.schema().relation_names(), topk.value_or(topk_));
    obs.text = render_relevant("relations", obs.names);
    return obs;
}

Observation ActionEnvironment::get_classes(std::string_view target, std::optional<std::size_t> topk)
{
    const Target t = resolve_nonempty(target);
    std::set<std::string> classes;
    for (const auto& m : t.members)
        for (const auto& c : graph_.schema().classes_of(m))
            classes.insert(c);
    Observation obs;
    obs.names = filter({classes.begin(), classes.end()}, topk.value_or(topk_));
    obs.text = render_classes(t.display, obs.names);
    return obs;
}

Observation ActionEnvironment::get_relevant_classes(std::string_view task, std::optional<std::size_t> topk)
{
    task = unquote(task);
    if (task.empty())
        throw Error(ErrorCode::InvalidArgument, "get_relevant_classes needs a task description");
    Observation obs;
    obs.names = retriever_.topk(task, graph_.schema().class_names(), topk.value_or(topk_));
    obs.text = render_relevant("classes", obs.names);
    return obs;
}

Observation ActionEnvironment::get_descriptions(const std::vector<DescriptionRequest>& items)
{
    if (items.empty())
        throw Error(ErrorCode::InvalidArgument, "get_descriptions needs at least one schema item");
    const SchemaView& schema = graph_.schema();
    std::vector<std::string> entries;
    Observation obs;
    for (const auto& item : items) {
        const std::size_t n = entries.size() + 1;
        if (const auto* r = schema.relation(item.name)) {
            const bool outgoing = item.direction.value_or(RelationDirection::Outgoing) == RelationDirection::Outgoing;
            const std::string& end = outgoing ? r->range : r->domain;
            std::string entry = fmt::format("{}. the {} relation '{}', which describes {}. The type of its {} entities is '{}'",
                                            n, outgoing ? "outgoing" : "incoming", r->name, strip_period(r->description),
                                            outgoing ? "tail" : "head", end);
            if (const auto* c = schema.klass(end); c && !c->description.empty())
                entry += fmt::format(" ({})", c->description);
            entry += '.';
            entries.push_back(std::move(entry));
        } else if (const auto* c = schema.klass(item.name)) {
            if (item.direction)
                throw Error(ErrorCode::InvalidArgument,
                            fmt::format("'{}' is a class; directions apply to relations only", item.name));
            entries.push_back(fmt::format("{}. the class '{}', which describes {}.", n, c->name, strip_period(c->description)));
        } else {
            throw Error(ErrorCode::UnknownSchemaItem, fmt::format("'{}' is not a relation or class of the KG", item.name));
        }
        obs.names.push_back(item.name);
    }
    obs.text = fmt::format("{}", fmt::join(entries, " "));
    return obs;
}

// ---- numbered-variable functions --------------------------------------------------

Observation ActionEnvironment::new_variable(Denotation value, Expr expr, std::string type)
{
    const std::size_t id = variables_.size();
    Observation obs;
    obs.variable = id;
    obs.text = value.is_count() ? render_count(id, value.count()) : render_variable(id, type);
    variables_.push_back({std::move(value), std::move(expr), std::move(type)});
    return obs;
}

Observation ActionEnvironment::baseline_get_relations(std::string_view target)
{
    const Target t = resolve_nonempty(target);
    std::set<std::string> names;
    for (const auto& m : t.members) {
        for (const auto& e : graph_.outgoing(m))
            names.insert(e.predicate);
        for (const auto& e : graph_.incoming(m))
            names.insert(e.predicate);
    }
    Observation obs;
    obs.names = filter({names.begin(), names.end()}, baseline_limit_ == 0 ? names.size() + 1 : baseline_limit_);
    obs.text = render_list(obs.names);
    return obs;
}

Observation ActionEnvironment::get_neighbors(std::string_view target, std::string_view relation_arg)
{
    const Target t = resolve_nonempty(target);
    const DescriptionRequest rel = parse_description_request(relation_arg);
    const SchemaView& schema = graph_.schema();
    const RelationInfo* info = schema.relation(rel.name);
    if (!info)
        throw Error(ErrorCode::UnknownRelation, fmt::format("'{}' is not a relation of the KG", rel.name));

    bool has_out = false;
    bool has_in = false;
    for (const auto& m : t.members) {
        for (const auto& e : graph_.outgoing(m))
            has_out = has_out || e.predicate == rel.name;
        for (const auto& e : graph_.incoming(m))
            has_in = has_in || e.predicate == rel.name;
    }
    bool outgoing = false;
    if (rel.direction) {
        outgoing = *rel.direction == RelationDirection::Outgoing;
    } else if (has_out && has_in) {
        throw Error(ErrorCode::UnknownRelation,
                    fmt::format("'{}' is both outgoing and incoming for {}; write '{} (outgoing)' or '{} (incoming)'",
                                rel.name, t.display, rel.name, rel.name));
    } else if (has_out || has_in) {
        outgoing = has_out;
    } else {
        throw Error(ErrorCode::UnknownRelation, fmt::format("'{}' is not a relation of {}", rel.name, t.display));
    }
    Expr expr = outgoing ? Expr::node(Op::Join, {Expr::node(Op::Reverse, {Expr::relation(rel.name)}), t.expr})
                         : Expr::node(Op::Join, {Expr::relation(rel.name), t.expr});
    Denotation value = evaluate(expr, graph_);
    return new_variable(std::move(value), std::move(expr), outgoing ? info->range : info->domain);
}

Observation ActionEnvironment::intersection(std::string_view a, std::string_view b)
{
    const Target ta = resolve(a);
    const Target tb = resolve(b);
    const SchemaView& schema = graph_.schema();
    auto all_in = [&](const EntitySet& members, const std::string& type) {
        if (type.empty())
            return false;
        const auto& inst = schema.instances_of(type);
        return std::all_of(members.begin(), members.end(), [&](const std::string& m) { return inst.contains(m); });
    };
    std::string type;
    if (ta.type == tb.type)
        type = ta.type;
    else if (all_in(ta.members, tb.type))
        type = ta.type.empty() ? tb.type : ta.type;
    else if (all_in(tb.members, ta.type))
        type = tb.type.empty() ? ta.type : tb.type;
    else
        throw Error(ErrorCode::TypeMismatch,
                    fmt::format("{} holds instances of {} and {} holds instances of {}; both must be of the same type",
                                ta.display, ta.type.empty() ? "an unknown class" : ta.type, tb.display,
                                tb.type.empty() ? "an unknown class" : tb.type));
    Expr expr = Expr::node(Op::And, {ta.expr, tb.expr});
    Denotation value = evaluate(expr, graph_);
    return new_variable(std::move(value), std::move(expr), std::move(type));
}

Observation ActionEnvironment::get_attributes(std::string_view target)
{
    const Target t = resolve_nonempty(target);
    const SchemaView& schema = graph_.schema();
    std::set<std::string> names;
    for (const auto& m : t.members)
        for (const auto& e : graph_.outgoing(m))
            if (const auto* r = schema.relation(e.predicate); r && is_numeric_datatype(r->range))
                names.insert(e.predicate);
    Observation obs;
    obs.names.assign(names.begin(), names.end());
    obs.text = render_list(obs.names);
    return obs;
}

std::string ActionEnvironment::attribute_name(std::string_view attribute) const
{
    const std::string name(unquote(attribute));
    const auto* r = graph_.schema().relation(name);
    if (!r)
        throw Error(ErrorCode::UnknownRelation, fmt::format("'{}' is not a relation of the KG", name));
    if (!is_numeric_datatype(r->range))
        throw Error(ErrorCode::TypeMismatch, fmt::format("'{}' is not a numerical attribute", name));
    return name;
}

Observation ActionEnvironment::superlative(Op op, std::string_view target, std::string_view attribute)
{
    const Target t = resolve(target);
    const std::string attr = attribute_name(attribute);
    Expr expr = Expr::node(op, {t.expr, Expr::relation(attr)});
    Denotation value = evaluate(expr, graph_);
    return new_variable(std::move(value), std::move(expr), t.type);
}

Observation ActionEnvironment::argmax(std::string_view target, std::string_view attribute)
{
    return superlative(Op::ArgMax, target, attribute);
}

Observation ActionEnvironment::argmin(std::string_view target, std::string_view attribute)
{
    return superlative(Op::ArgMin, target, attribute);
}

Observation ActionEnvironment::count(std::string_view target)
{
    const Target t = resolve(target);
    Expr expr = Expr::node(Op::Count, {t.expr});
    return new_variable(Denotation(static_cast<std::int64_t>(t.members.size())), std::move(expr), {});
}

Observation ActionEnvironment::comparative(Op op, std::string_view attribute, std::string_view value_text)
{
    if (!is_comparative(op))
        throw Error(ErrorCode::InvalidArgument, "comparative() needs LT, LE, GT or GE");
    const std::string attr = attribute_name(attribute);
    const std::string_view v = unquote(value_text);
    Expr literal;
    if (const auto caret = v.find("^^"); caret != std::string_view::npos) {
        literal = Expr::literal(std::string(v.substr(0, caret)), std::string(v.substr(caret + 2)));
    } else {
        const bool integral = v.find_first_of(".eE") == std::string_view::npos;
        literal = Expr::literal(std::string(v), integral ? "http://www.w3.org/2001/XMLSchema#integer"
                                                         : "http://www.w3.org/2001/XMLSchema#float");
    }
    if (!is_numeric_datatype(literal.datatype) || !Decimal::parse(literal.name))
        throw Error(ErrorCode::TypeMismatch, fmt::format("'{}' is not a numeric literal", v));
    Expr expr = Expr::node(op, {Expr::relation(attr), std::move(literal)});
    Denotation value = evaluate(expr, graph_);
    return new_variable(std::move(value), std::move(expr), graph_.schema().relation(attr)->domain);
}

Observation ActionEnvironment::get_relevant_attributes(std::string_view task, std::optional<std::size_t> topk)
{
    task = unquote(task);
    if (task.empty())
        throw Error(ErrorCode::InvalidArgument, "get_relevant_attributes needs a task description");
    const auto attrs = numeric_attributes(graph_.schema());
    Observation obs;
    if (!attrs.empty())
        obs.names = retriever_.topk(task, attrs, topk.value_or(topk_));
    obs.text = render_relevant("attributes", obs.names);
    return obs;
}

} // namespace kgqa
