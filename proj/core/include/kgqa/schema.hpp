// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "kgqa/sexpr.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace kgqa {

struct RelationInfo {
    std::string name;
    std::string description;
    std::string domain;
    std::string range; // class name or literal datatype (type.float, xsd:int, ...)
    bool mediator = false; // range end is a mediator (CVT) node
};

struct ClassInfo {
    std::string name;
    std::string description;
    bool mediator = false;
};

/// True for Freebase value types and XML Schema datatypes.
[[nodiscard]] bool is_literal_type(std::string_view type_name);

/// Schema metadata of a knowledge graph: relations, classes, class
/// membership and entity labels. Immutable once handed to a KnowledgeGraph.
class SchemaView {
public:
    void add_class(ClassInfo info);
    void add_relation(RelationInfo info);
    void add_instance(const std::string& entity, const std::string& class_name);
    void set_label(const std::string& entity, std::string label);
    void add_entity(const std::string& entity);

    /// Checks domain/range references; throws SchemaViolation.
    void validate() const;

    [[nodiscard]] const RelationInfo* relation(std::string_view name) const;
    [[nodiscard]] const ClassInfo* klass(std::string_view name) const;
    [[nodiscard]] bool has_entity(std::string_view id) const;

    [[nodiscard]] bool is_attribute(std::string_view relation) const;
    /// Class at the far end of a relation traversed forwards (range) or backwards (domain).
    [[nodiscard]] std::string end_class(std::string_view relation, bool forward) const;
    /// True when the node reached by traversing `relation` is a mediator.
    [[nodiscard]] bool reaches_mediator(std::string_view relation, bool forward) const;

    [[nodiscard]] const std::set<std::string>& classes_of(std::string_view entity) const;
    [[nodiscard]] const std::set<std::string>& instances_of(std::string_view class_name) const;
    [[nodiscard]] std::optional<std::string> label(std::string_view entity) const;
    [[nodiscard]] std::optional<std::string> entity_by_label(std::string_view label) const;

    [[nodiscard]] std::vector<std::string> relation_names() const;
    [[nodiscard]] std::vector<std::string> class_names() const;
    [[nodiscard]] std::vector<std::string> attribute_names() const;
    [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }

    [[nodiscard]] std::size_t relation_count() const { return relations_.size(); }
    [[nodiscard]] std::size_t class_count() const { return classes_.size(); }

    static SchemaView from_json(const nlohmann::json& doc);
    [[nodiscard]] nlohmann::json to_json() const;

private:
    std::map<std::string, RelationInfo, std::less<>> relations_;
    std::map<std::string, ClassInfo, std::less<>> classes_;
    std::map<std::string, std::set<std::string>, std::less<>> membership_;
    std::map<std::string, std::set<std::string>, std::less<>> instances_;
    std::map<std::string, std::string, std::less<>> labels_;
    std::set<std::string, std::less<>> entities_;
    std::vector<std::string> warnings_;
};

SchemaView load_schema(const std::filesystem::path& path);

/// Resolves Symbol atoms by role (entity-id pattern, class, relation, then
/// known entity) and type-checks the result. Refs are left untouched.
/// Throws UnboundAtom / TypeMismatch.
[[nodiscard]] Expr bind(const Expr& expr, const SchemaView& schema);

} // namespace kgqa
