// SPDX-License-Identifier: Apache-2.0
#include "kgqa/error.hpp"
#include "kgqa/sparql.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

namespace kgqa {

namespace {

constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

bool simple_local_name(std::string_view id)
{
    if (id.empty() || id.back() == '.' || id.front() == '.')
        return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
    });
}

std::string iri_term(std::string_view id)
{
    if (simple_local_name(id))
        return fmt::format("ns:{}", id);
    return fmt::format("<{}{}>", kFreebaseNs, id);
}

std::string escape_string(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out;
}

std::string literal_sparql(std::string_view lexical, std::string_view datatype)
{
    const std::string dt = normalize_datatype(datatype);
    std::string dt_term;
    if (dt.rfind(kXsd, 0) == 0)
        dt_term = fmt::format("xsd:{}", std::string_view(dt).substr(kXsd.size()));
    else if (dt.find("://") != std::string::npos)
        dt_term = fmt::format("<{}>", dt);
    else
        dt_term = iri_term(dt);
    return fmt::format("\"{}\"^^{}", escape_string(lexical), dt_term);
}

class Compiler {
public:
    std::string compile(const Expr& e)
    {
        std::string projection;
        switch (value_kind(e)) {
        case ValueKind::Number: {
            const std::string v = fresh();
            into(e.args[0], v, body_, 1);
            projection = fmt::format("(COUNT(DISTINCT {}) AS ?count)", v);
            break;
        }
        case ValueKind::Binary:
            throw Error(ErrorCode::UnsupportedForm,
                        fmt::format("{} denotes a binary relation; only entity sets and counts can be queried",
                                    print_sexpr(e)));
        default: {
            const std::string v = fresh();
            into(e, v, body_, 1);
            projection = fmt::format("DISTINCT {}", v);
            break;
        }
        }
        return fmt::format("PREFIX ns: <{}>\nPREFIX xsd: <{}>\nSELECT {} WHERE {{\n{}}}\n", kFreebaseNs, kXsd,
                           projection, body_);
    }

private:
    int next_ = 0;
    std::string body_;

    std::string fresh() { return fmt::format("?x{}", next_++); }

    static void line(std::string& out, int depth, std::string_view text)
    {
        out.append(static_cast<std::size_t>(depth) * 2, ' ');
        out += text;
        out += '\n';
    }

    static std::string constant(const Expr& e)
    {
        if (e.op == Op::Literal)
            return literal_sparql(e.name, e.datatype);
        return iri_term(e.name);
    }

    // Constrains `term` (a variable) to the members of the entity set `e`.
    void into(const Expr& e, const std::string& term, std::string& out, int depth)
    {
        switch (e.op) {
        case Op::Entity:
        case Op::Literal: line(out, depth, fmt::format("VALUES {} {{ {} }}", term, constant(e))); return;
        case Op::Class:
            line(out, depth, fmt::format("{} {} {} .", term, iri_term(kTypePredicate), iri_term(e.name)));
            return;
        case Op::And:
            into(e.args[0], term, out, depth);
            into(e.args[1], term, out, depth);
            return;
        case Op::Join: {
            if (value_kind(e.args[1]) == ValueKind::Binary)
                mismatch(e, "an entity set");
            const Expr& u = e.args[1];
            if (u.op == Op::Entity || u.op == Op::Literal) {
                path(e.args[0], term, constant(u), out, depth);
                return;
            }
            const std::string v = fresh();
            into(u, v, out, depth);
            path(e.args[0], term, v, out, depth);
            return;
        }
        case Op::Lt:
        case Op::Le:
        case Op::Gt:
        case Op::Ge: {
            static constexpr std::string_view ops[] = {"<", "<=", ">", ">="};
            const std::string v = fresh();
            path(e.args[0], term, v, out, depth);
            const auto& lit = e.args[1];
            line(out, depth,
                 fmt::format("FILTER({} {} {})", v, ops[static_cast<int>(e.op) - static_cast<int>(Op::Lt)],
                             literal_sparql(lit.name, lit.datatype)));
            return;
        }
        case Op::ArgMax:
        case Op::ArgMin: {
            const std::string value = fresh();
            into(e.args[0], term, out, depth);
            path(e.args[1], term, value, out, depth);
            line(out, depth, fmt::format("FILTER(isNumeric({}))", value));
            const std::string inner_term = fresh();
            const std::string inner_value = fresh();
            const std::string best = fresh();
            line(out, depth, "{");
            line(out, depth + 1,
                 fmt::format("SELECT ({}({}) AS {}) WHERE {{", e.op == Op::ArgMax ? "MAX" : "MIN", inner_value, best));
            into(e.args[0], inner_term, out, depth + 2);
            path(e.args[1], inner_term, inner_value, out, depth + 2);
            line(out, depth + 2, fmt::format("FILTER(isNumeric({}))", inner_value));
            line(out, depth + 1, "}");
            line(out, depth, "}");
            line(out, depth, fmt::format("FILTER({} = {})", value, best));
            return;
        }
        case Op::Count: throw Error(ErrorCode::TypeMismatch, "COUNT is only allowed as the outermost operator");
        case Op::Ref:
            throw Error(ErrorCode::UnsupportedForm, fmt::format("'{}' must be substituted before compilation", e.name));
        default: mismatch(e, "an entity set");
        }
    }

    // Links `subject` to `object` through the binary expression `b`.
    void path(const Expr& b, const std::string& subject, const std::string& object, std::string& out, int depth)
    {
        switch (b.op) {
        case Op::Relation: line(out, depth, fmt::format("{} {} {} .", subject, iri_term(b.name), object)); return;
        case Op::Reverse: path(b.args[0], object, subject, out, depth); return;
        case Op::Join: {
            if (value_kind(b.args[1]) != ValueKind::Binary)
                mismatch(b, "a binary relation");
            const std::string mid = fresh();
            path(b.args[0], subject, mid, out, depth);
            path(b.args[1], mid, object, out, depth);
            return;
        }
        case Op::Ref:
            throw Error(ErrorCode::UnsupportedForm, fmt::format("'{}' must be substituted before compilation", b.name));
        default: mismatch(b, "a binary relation");
        }
    }

    [[noreturn]] static void mismatch(const Expr& e, std::string_view want)
    {
        throw Error(ErrorCode::TypeMismatch, fmt::format("{} does not denote {}", print_sexpr(e), want));
    }
};

} // namespace

std::string compile_sparql(const Expr& expr, const SchemaView& schema)
{
    if (has_refs(expr))
        throw Error(ErrorCode::UnsupportedForm,
                    fmt::format("'{}' must be substituted before compilation", collect_refs(expr).front()));
    return Compiler().compile(bind(expr, schema));
}

} // namespace kgqa
