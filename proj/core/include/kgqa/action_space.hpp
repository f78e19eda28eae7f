// SPDX-License-Identifier: Apache-2.0
//
// Tool functions an agent calls against a knowledge graph, with the exact
// observation text each one renders.
#pragma once

#include "kgqa/graph.hpp"
#include "kgqa/retrieval.hpp"
#include "kgqa/sexpr.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgqa {

class Error;

struct Observation {
    std::string text;
    std::vector<std::string> outgoing; // get_relations
    std::vector<std::string> incoming;
    std::vector<std::string> names; // every other list-valued action
    std::optional<std::size_t> variable;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// A numbered variable (#0, #1, ...) of the baseline action set.
struct Variable {
    Denotation value;
    Expr expr;        // equivalent logical form
    std::string type; // class reported in observations
};

struct ActionRecord {
    std::string name;
    std::string args; // raw argument text
    std::string observation;
    bool failed = false;
};

enum class RelationDirection { Outgoing, Incoming };

/// One get_descriptions argument: `name`, `name (outgoing)` or `name (incoming)`.
struct DescriptionRequest {
    std::string name;
    std::optional<RelationDirection> direction;
};

// Renderers. Each is a pure function of its arguments.
[[nodiscard]] std::string render_list(const std::vector<std::string>& names);
[[nodiscard]] std::string render_relations(std::string_view subject, const std::vector<std::string>& outgoing,
                                           const std::vector<std::string>& incoming);
[[nodiscard]] std::string render_classes(std::string_view subject, const std::vector<std::string>& classes);
/// "The relevant <kind> are a, b." (kind: relations, classes, attributes).
[[nodiscard]] std::string render_relevant(std::string_view kind, const std::vector<std::string>& names);
[[nodiscard]] std::string render_variable(std::size_t id, std::string_view type);
[[nodiscard]] std::string render_count(std::size_t id, std::int64_t value);
[[nodiscard]] std::string render_action_error(const Error& error);

/// Splits a comma-separated argument list at top-level commas.
[[nodiscard]] std::vector<std::string> split_args(std::string_view text);
/// Parses `name`, `name (outgoing)`, `name (incoming)`. Throws InvalidArgument.
[[nodiscard]] DescriptionRequest parse_description_request(std::string_view text);

class ActionEnvironment {
public:
    /// Names of every action understood by execute().
    static const std::vector<std::string>& action_names();

    ActionEnvironment(const KnowledgeGraph& graph, Retriever retriever, std::size_t topk = 5);

    void set_question(std::string question) { question_ = std::move(question); }
    /// Current subtask description; relation filtering ranks against it.
    void set_task(std::string task) { task_ = std::move(task); }
    [[nodiscard]] const std::string& task_text() const noexcept { return task_.empty() ? question_ : task_; }

    /// Upper bound on the flat baseline get_relations list; 0 means unlimited.
    void set_baseline_relation_limit(std::size_t limit) { baseline_limit_ = limit; }
    /// When set, execute("get_relations") renders the flat numbered-variable list.
    void set_flat_relations(bool flat) { flat_relations_ = flat; }
    /// Restricts execute() to these actions; empty allows all.
    void set_allowed_actions(std::vector<std::string> names) { allowed_ = std::move(names); }

    void bind_ref(const std::string& id, Expr expr) { refs_.insert_or_assign(id, std::move(expr)); }
    [[nodiscard]] const RefBindings& refs() const noexcept { return refs_; }

    /// Runs `name(raw_args)` and appends the outcome to the log. Action
    /// failures are logged with their rendered error text and rethrown.
    Observation execute(std::string_view name, std::string_view raw_args);

    // Decomposition-driven functions.
    Observation get_relations(std::string_view target, std::optional<std::size_t> topk = std::nullopt);
    Observation get_relevant_relations(std::string_view task, std::optional<std::size_t> topk = std::nullopt);
    Observation get_classes(std::string_view target, std::optional<std::size_t> topk = std::nullopt);
    Observation get_relevant_classes(std::string_view task, std::optional<std::size_t> topk = std::nullopt);
    Observation get_descriptions(const std::vector<DescriptionRequest>& items);

    // Numbered-variable functions.
    Observation baseline_get_relations(std::string_view target);
    Observation get_neighbors(std::string_view target, std::string_view relation);
    Observation intersection(std::string_view a, std::string_view b);
    Observation get_attributes(std::string_view target);
    Observation argmax(std::string_view target, std::string_view attribute);
    Observation argmin(std::string_view target, std::string_view attribute);
    Observation count(std::string_view target);
    Observation comparative(Op op, std::string_view attribute, std::string_view value);
    Observation get_relevant_attributes(std::string_view task, std::optional<std::size_t> topk = std::nullopt);

    [[nodiscard]] const std::vector<Variable>& variables() const noexcept { return variables_; }
    [[nodiscard]] const Variable& variable(std::string_view id) const;
    [[nodiscard]] const std::vector<ActionRecord>& log() const noexcept { return log_; }
    [[nodiscard]] const KnowledgeGraph& graph() const noexcept { return graph_; }

    /// Logical form for a target argument: ref, variable, s-expression, mid or label.
    [[nodiscard]] Expr target_expr(std::string_view target) const;

private:
    struct Target {
        Expr expr;
        EntitySet members;
        std::string display;
        std::string type; // known class, empty otherwise
    };

    const KnowledgeGraph& graph_;
    Retriever retriever_;
    std::size_t topk_;
    std::size_t baseline_limit_ = 0;
    bool flat_relations_ = false;
    std::vector<std::string> allowed_;
    std::string question_;
    std::string task_;
    RefBindings refs_;
    std::vector<Variable> variables_;
    std::vector<ActionRecord> log_;

    Target resolve(std::string_view target) const;
    Target resolve_nonempty(std::string_view target) const;
    std::vector<std::string> filter(std::vector<std::string> names, std::size_t k) const;
    Observation new_variable(Denotation value, Expr expr, std::string type);
    Observation superlative(Op op, std::string_view target, std::string_view attribute);
    std::string attribute_name(std::string_view attribute) const;
};

} // namespace kgqa
