// SPDX-License-Identifier: Apache-2.0
#include "kgqa/decompose.hpp"

#include "kgqa/error.hpp"

#include <fmt/format.h>

namespace kgqa {

namespace {

// Operand handed to the enclosing operator: an inline expression, or the
// result of a subtask that the parent may reference or extend.
struct Piece {
    Expr operand;
    std::optional<std::size_t> subtask; // 0-based
    bool mediator_end = false;
};

class Decomposer {
public:
    explicit Decomposer(const SchemaView& schema) : schema_(schema) {}

    std::vector<Subtask> run(const Expr& expr)
    {
        Piece top = piece(expr);
        if (!top.subtask)
            open_subtask(top.operand);
        return std::move(tasks_);
    }

private:
    const SchemaView& schema_;
    std::vector<Subtask> tasks_;

    Piece open_subtask(Expr step, bool mediator_end = false)
    {
        Subtask t;
        t.index = static_cast<int>(tasks_.size()) + 1;
        t.steps.push_back(std::move(step));
        tasks_.push_back(std::move(t));
        const auto idx = tasks_.size() - 1;
        return {task_ref(idx), idx, mediator_end};
    }

    Piece extend_subtask(std::size_t idx, Expr step, bool mediator_end = false)
    {
        tasks_[idx].steps.push_back(std::move(step));
        return {task_ref(idx), idx, mediator_end};
    }

    Expr task_ref(std::size_t idx) const { return Expr::ref(RefId{static_cast<int>(idx) + 1, std::nullopt}.str()); }

    Expr last_step_ref(std::size_t idx) const
    {
        return Expr::ref(RefId{static_cast<int>(idx) + 1, static_cast<int>(tasks_[idx].steps.size())}.str());
    }

    bool lands_on_mediator(const Expr& b) const
    {
        if (b.op == Op::Relation)
            return schema_.reaches_mediator(b.name, false);
        if (b.op == Op::Reverse && b.args[0].op == Op::Relation)
            return schema_.reaches_mediator(b.args[0].name, true);
        return false;
    }

    Piece piece(const Expr& e)
    {
        switch (e.op) {
        case Op::Entity:
        case Op::Class:
        case Op::Literal:
        case Op::Relation: return {e, std::nullopt, false};
        case Op::Ref:
            throw Error(ErrorCode::UnboundRef, fmt::format("decomposition needs a Ref-free form, found '{}'", e.name));
        case Op::Symbol:
            throw Error(ErrorCode::UnboundAtom, fmt::format("'{}' is not bound to the schema", e.name));
        case Op::Reverse: return {e, std::nullopt, false};
        case Op::Join: {
            if (value_kind(e) == ValueKind::Binary)
                return {e, std::nullopt, false};
            const Piece inner = piece(e.args[1]);
            const bool mediator = lands_on_mediator(e.args[0]);
            if (inner.subtask && inner.mediator_end) {
                const auto idx = *inner.subtask;
                return extend_subtask(idx, Expr::node(Op::Join, {e.args[0], last_step_ref(idx)}), mediator);
            }
            return open_subtask(Expr::node(Op::Join, {e.args[0], inner.operand}), mediator);
        }
        case Op::And: {
            const int class_side = e.args[0].op == Op::Class ? 0 : (e.args[1].op == Op::Class ? 1 : -1);
            if (class_side >= 0) {
                const std::size_t other = class_side == 0 ? 1 : 0;
                const Piece p = piece(e.args[other]);
                if (p.subtask) {
                    Expr step = e;
                    step.args[other] = last_step_ref(*p.subtask);
                    return extend_subtask(*p.subtask, std::move(step));
                }
                Expr step = e;
                step.args[other] = p.operand;
                return open_subtask(std::move(step));
            }
            const Piece a = piece(e.args[0]);
            const Piece b = piece(e.args[1]);
            return open_subtask(Expr::node(Op::And, {a.operand, b.operand}));
        }
        case Op::Count: {
            const Piece p = piece(e.args[0]);
            return open_subtask(Expr::node(Op::Count, {p.operand}));
        }
        case Op::ArgMax:
        case Op::ArgMin: {
            const Piece p = piece(e.args[0]);
            return open_subtask(Expr::node(e.op, {p.operand, e.args[1]}));
        }
        case Op::Lt:
        case Op::Le:
        case Op::Gt:
        case Op::Ge: return open_subtask(e);
        }
        return {e, std::nullopt, false};
    }
};

} // namespace

std::vector<Subtask> decompose_by_ops(const Expr& expr, const SchemaView& schema)
{
    if (has_refs(expr))
        throw Error(ErrorCode::UnboundRef,
                    fmt::format("decomposition needs a Ref-free form, found '{}'", collect_refs(expr).front()));
    return Decomposer(schema).run(bind(expr, schema));
}

RefBindings subtask_bindings(const std::vector<Subtask>& subtasks)
{
    RefBindings out;
    for (const auto& t : subtasks) {
        for (std::size_t j = 0; j < t.steps.size(); ++j)
            out.insert_or_assign(RefId{t.index, static_cast<int>(j) + 1}.str(), t.steps[j]);
        if (!t.steps.empty())
            out.insert_or_assign(RefId{t.index, std::nullopt}.str(), t.steps.back());
    }
    return out;
}

Expr reassemble(const std::vector<Subtask>& subtasks)
{
    if (subtasks.empty())
        throw Error(ErrorCode::InvalidArgument, "no subtasks to reassemble");
    return substitute_refs(Expr::ref(RefId{subtasks.back().index, std::nullopt}.str()), subtask_bindings(subtasks));
}

} // namespace kgqa
