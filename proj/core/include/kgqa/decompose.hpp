// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "kgqa/schema.hpp"
#include "kgqa/sexpr.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kgqa {

/// One unit of iterative decomposition. Steps may reference earlier subtasks
/// as `s-exp-<i>` and earlier steps of the same subtask as `s-exp-<i>.<j>`.
struct Subtask {
    int index = 0;
    std::vector<Expr> steps;
    std::optional<std::string> description;

    friend bool operator==(const Subtask&, const Subtask&) = default;
};

/// Splits a bound, Ref-free form into subtasks: one per intersection,
/// comparative, superlative, count and question-driven projection. A
/// projection applied to the result of a projection that lands on a mediator
/// node stays inside that subtask as an extra step, and so does a class filter
/// (AND with a class atom). Throws UnboundAtom / TypeMismatch.
[[nodiscard]] std::vector<Subtask> decompose_by_ops(const Expr& expr, const SchemaView& schema);

/// Bindings `s-exp-i.j` -> step j and `s-exp-i` -> last step of subtask i.
[[nodiscard]] RefBindings subtask_bindings(const std::vector<Subtask>& subtasks);

/// The full form represented by the last subtask, with every Ref spliced in.
[[nodiscard]] Expr reassemble(const std::vector<Subtask>& subtasks);

} // namespace kgqa
