// SPDX-License-Identifier: Apache-2.0
#include "kgqa/schema.hpp"

#include "kgqa/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>

namespace kgqa {

namespace {

const std::set<std::string> kEmptySet;

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

} // namespace

bool is_literal_type(std::string_view type_name)
{
    static const std::set<std::string, std::less<>> freebase = {
        "type.int", "type.float", "type.datetime", "type.boolean", "type.text",
        "type.rawstring", "type.uri", "type.enumeration",
    };
    if (freebase.contains(type_name))
        return true;
    const std::string full = normalize_datatype(type_name);
    return full.rfind("http://www.w3.org/2001/XMLSchema#", 0) == 0;
}

void SchemaView::add_class(ClassInfo info)
{
    if (info.description.empty())
        warnings_.push_back(fmt::format("class '{}' has an empty description", info.name));
    auto name = info.name;
    classes_.insert_or_assign(std::move(name), std::move(info));
}

void SchemaView::add_relation(RelationInfo info)
{
    if (info.description.empty())
        warnings_.push_back(fmt::format("relation '{}' has an empty description", info.name));
    auto name = info.name;
    relations_.insert_or_assign(std::move(name), std::move(info));
}

void SchemaView::add_instance(const std::string& entity, const std::string& class_name)
{
    membership_[entity].insert(class_name);
    instances_[class_name].insert(entity);
    entities_.insert(entity);
}

void SchemaView::set_label(const std::string& entity, std::string label)
{
    labels_[entity] = std::move(label);
    entities_.insert(entity);
}

void SchemaView::add_entity(const std::string& entity)
{
    entities_.insert(entity);
}

void SchemaView::validate() const
{
    std::vector<std::string> problems;
    auto check_end = [&](const RelationInfo& r, const std::string& end, std::string_view role) {
        if (end.empty())
            problems.push_back(fmt::format("relation '{}' has no {}", r.name, role));
        else if (!classes_.contains(end) && !is_literal_type(end))
            problems.push_back(fmt::format("relation '{}' {} '{}' is not a declared class", r.name, role, end));
    };
    for (const auto& [name, r] : relations_) {
        check_end(r, r.domain, "domain");
        check_end(r, r.range, "range");
    }
    for (const auto& [entity, classes] : membership_)
        for (const auto& c : classes)
            if (!classes_.contains(c))
                problems.push_back(fmt::format("entity '{}' is an instance of undeclared class '{}'", entity, c));
    if (!problems.empty()) {
        std::string msg = problems.front();
        for (std::size_t i = 1; i < problems.size(); ++i)
            msg += "; " + problems[i];
        throw Error(ErrorCode::SchemaViolation, msg);
    }
}

const RelationInfo* SchemaView::relation(std::string_view name) const
{
    const auto it = relations_.find(name);
    return it == relations_.end() ? nullptr : &it->second;
}

const ClassInfo* SchemaView::klass(std::string_view name) const
{
    const auto it = classes_.find(name);
    return it == classes_.end() ? nullptr : &it->second;
}

bool SchemaView::has_entity(std::string_view id) const
{
    return entities_.contains(id);
}

bool SchemaView::is_attribute(std::string_view relation) const
{
    const auto* r = this->relation(relation);
    return r && is_literal_type(r->range);
}

std::string SchemaView::end_class(std::string_view relation, bool forward) const
{
    const auto* r = this->relation(relation);
    if (!r)
        return {};
    return forward ? r->range : r->domain;
}

bool SchemaView::reaches_mediator(std::string_view relation, bool forward) const
{
    const auto* r = this->relation(relation);
    if (!r)
        return false;
    if (forward && r->mediator)
        return true;
    const auto* c = klass(forward ? r->range : r->domain);
    return c && c->mediator;
}

const std::set<std::string>& SchemaView::classes_of(std::string_view entity) const
{
    const auto it = membership_.find(entity);
    return it == membership_.end() ? kEmptySet : it->second;
}

const std::set<std::string>& SchemaView::instances_of(std::string_view class_name) const
{
    const auto it = instances_.find(class_name);
    return it == instances_.end() ? kEmptySet : it->second;
}

std::optional<std::string> SchemaView::label(std::string_view entity) const
{
    const auto it = labels_.find(entity);
    if (it == labels_.end())
        return std::nullopt;
    return it->second;
}

std::optional<std::string> SchemaView::entity_by_label(std::string_view label) const
{
    const std::string wanted = lower(label);
    for (const auto& [entity, l] : labels_)
        if (lower(l) == wanted)
            return entity;
    return std::nullopt;
}

std::vector<std::string> SchemaView::relation_names() const
{
    std::vector<std::string> out;
    out.reserve(relations_.size());
    for (const auto& [name, _] : relations_)
        out.push_back(name);
    return out;
}

std::vector<std::string> SchemaView::class_names() const
{
    std::vector<std::string> out;
    out.reserve(classes_.size());
    for (const auto& [name, _] : classes_)
        out.push_back(name);
    return out;
}

std::vector<std::string> SchemaView::attribute_names() const
{
    std::vector<std::string> out;
    for (const auto& [name, r] : relations_)
        if (is_literal_type(r.range))
            out.push_back(name);
    return out;
}

SchemaView SchemaView::from_json(const nlohmann::json& doc)
{
    SchemaView schema;
    try {
        for (const auto& c : doc.value("classes", nlohmann::json::array())) {
            schema.add_class(ClassInfo{c.at("name").get<std::string>(), c.value("description", std::string{}),
                                       c.value("mediator", false)});
        }
        for (const auto& r : doc.value("relations", nlohmann::json::array())) {
            schema.add_relation(RelationInfo{r.at("name").get<std::string>(), r.value("description", std::string{}),
                                             r.value("domain", std::string{}), r.value("range", std::string{}),
                                             r.value("mediator", false)});
        }
        const nlohmann::json instances = doc.value("instances", nlohmann::json::object());
        for (const auto& [entity, classes] : instances.items())
            for (const auto& c : classes)
                schema.add_instance(entity, c.get<std::string>());
        const nlohmann::json labels = doc.value("labels", nlohmann::json::object());
        for (const auto& [entity, label] : labels.items())
            schema.set_label(entity, label.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, fmt::format("malformed schema document: {}", e.what()));
    }
    schema.validate();
    return schema;
}

nlohmann::json SchemaView::to_json() const
{
    nlohmann::json doc;
    doc["classes"] = nlohmann::json::array();
    for (const auto& [name, c] : classes_)
        doc["classes"].push_back({{"name", name}, {"description", c.description}, {"mediator", c.mediator}});
    doc["relations"] = nlohmann::json::array();
    for (const auto& [name, r] : relations_)
        doc["relations"].push_back({{"name", name},
                                    {"description", r.description},
                                    {"domain", r.domain},
                                    {"range", r.range},
                                    {"mediator", r.mediator}});
    doc["instances"] = nlohmann::json::object();
    for (const auto& [entity, classes] : membership_)
        doc["instances"][entity] = classes;
    doc["labels"] = nlohmann::json::object();
    for (const auto& [entity, label] : labels_)
        doc["labels"][entity] = label;
    return doc;
}

SchemaView load_schema(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, fmt::format("cannot open schema file '{}'", path.string()));
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, fmt::format("schema '{}': {}", path.string(), e.what()));
    }
    return SchemaView::from_json(doc);
}

namespace {

enum class Role { Any, Unary, Binary };

class Binder {
public:
    explicit Binder(const SchemaView& schema) : schema_(schema) {}

    Expr bind(const Expr& e, Role role)
    {
        switch (e.op) {
        case Op::Entity:
            if (role == Role::Binary)
                mismatch(fmt::format("entity '{}' used as a relation", e.name));
            return e;
        case Op::Literal:
            if (role == Role::Binary)
                mismatch(fmt::format("literal '{}' used as a relation", e.name));
            return e;
        case Op::Ref: return e;
        case Op::Class:
            if (role == Role::Binary)
                mismatch(fmt::format("class '{}' used as a relation", e.name));
            if (!schema_.klass(e.name))
                unbound(e.name);
            return e;
        case Op::Relation:
            if (role == Role::Unary)
                mismatch(fmt::format("relation '{}' used as an entity set", e.name));
            if (!schema_.relation(e.name))
                unbound(e.name);
            return e;
        case Op::Symbol: return resolve(e.name, role);
        default: break;
        }

        Expr out{e.op, e.name, e.datatype, {}};
        switch (e.op) {
        case Op::And:
            out.args = {bind(e.args[0], Role::Unary), bind(e.args[1], Role::Unary)};
            require_unary(out.args[0]);
            require_unary(out.args[1]);
            break;
        case Op::Count:
            out.args = {bind(e.args[0], Role::Unary)};
            require_unary(out.args[0]);
            break;
        case Op::Reverse:
            out.args = {bind(e.args[0], Role::Binary)};
            require_binary(out.args[0]);
            break;
        case Op::Join:
            out.args.push_back(bind(e.args[0], Role::Binary));
            require_binary(out.args[0]);
            out.args.push_back(bind(e.args[1], role));
            break;
        case Op::ArgMax:
        case Op::ArgMin:
            out.args = {bind(e.args[0], Role::Unary), bind(e.args[1], Role::Binary)};
            require_unary(out.args[0]);
            require_binary(out.args[1]);
            break;
        default: // comparatives
            out.args = {bind(e.args[0], Role::Binary), e.args[1]};
            require_binary(out.args[0]);
            if (e.args[1].op != Op::Literal || !is_numeric_datatype(e.args[1].datatype))
                mismatch(fmt::format("{} needs a numeric literal", op_name(e.op)));
            break;
        }
        if (role == Role::Unary && value_kind(out) == ValueKind::Binary)
            mismatch(fmt::format("{} denotes a binary relation where an entity set is expected", print_sexpr(out)));
        if (role == Role::Binary && value_kind(out) == ValueKind::Unary)
            mismatch(fmt::format("{} denotes an entity set where a relation is expected", print_sexpr(out)));
        return out;
    }

private:
    const SchemaView& schema_;

    [[noreturn]] static void mismatch(const std::string& msg) { throw Error(ErrorCode::TypeMismatch, msg); }
    [[noreturn]] static void unbound(const std::string& name)
    {
        throw Error(ErrorCode::UnboundAtom, fmt::format("'{}' is not an entity, class or relation of the schema", name));
    }

    static void require_unary(const Expr& e)
    {
        const auto k = value_kind(e);
        if (k == ValueKind::Binary || k == ValueKind::Number)
            mismatch(fmt::format("{} does not denote an entity set", print_sexpr(e)));
    }

    static void require_binary(const Expr& e)
    {
        const auto k = value_kind(e);
        if (k == ValueKind::Unary || k == ValueKind::Number)
            mismatch(fmt::format("{} does not denote a binary relation", print_sexpr(e)));
    }

    Expr resolve(const std::string& name, Role role) const
    {
        if (is_entity_id(name))
            return Expr::entity(name);
        if (role != Role::Binary && schema_.klass(name))
            return Expr::klass(name);
        if (schema_.relation(name)) {
            if (role == Role::Unary)
                mismatch(fmt::format("relation '{}' used as an entity set", name));
            return Expr::relation(name);
        }
        if (role != Role::Binary && schema_.has_entity(name))
            return Expr::entity(name);
        unbound(name);
    }
};

} // namespace

Expr bind(const Expr& expr, const SchemaView& schema)
{
    return Binder(schema).bind(expr, Role::Any);
}

} // namespace kgqa
