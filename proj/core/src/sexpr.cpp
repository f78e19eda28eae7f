// SPDX-License-Identifier: Apache-2.0
#include "kgqa/sexpr.hpp"

#include "kgqa/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <set>
#include <utility>

namespace kgqa {

namespace {

constexpr std::string_view kXsdPrefix = "http://www.w3.org/2001/XMLSchema#";

struct OperatorInfo {
    std::string_view keyword;
    Op op;
};

constexpr std::array<OperatorInfo, 10> kOperators{{
    {"AND", Op::And},
    {"COUNT", Op::Count},
    {"R", Op::Reverse},
    {"JOIN", Op::Join},
    {"ARGMAX", Op::ArgMax},
    {"ARGMIN", Op::ArgMin},
    {"LT", Op::Lt},
    {"LE", Op::Le},
    {"GT", Op::Gt},
    {"GE", Op::Ge},
}};

std::optional<Op> lookup_operator(std::string_view word)
{
    for (const auto& info : kOperators)
        if (info.keyword == word)
            return info.op;
    return std::nullopt;
}

bool is_delimiter(char c)
{
    return c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c));
}

// Where an expression appears decides how a bare atom is read and which
// compound kinds are legal there.
enum class Slot { Top, Any, Unary, Binary, Literal };

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse()
    {
        skip_space();
        if (at_end())
            fail("an expression", "end of input");
        Expr e = parse_expr(Slot::Top);
        skip_space();
        if (!at_end())
            fail("end of input", fmt::format("'{}'", peek_token()));
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    bool at_end() const { return pos_ >= text_.size(); }

    void skip_space()
    {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    std::string peek_token() const
    {
        if (at_end())
            return "end of input";
        if (text_[pos_] == '(' || text_[pos_] == ')')
            return std::string(1, text_[pos_]);
        std::size_t end = pos_;
        while (end < text_.size() && !is_delimiter(text_[end]))
            ++end;
        return std::string(text_.substr(pos_, end - pos_));
    }

    [[noreturn]] void fail(std::string_view expected, std::string_view found) const
    {
        throw Error(ErrorCode::SyntaxError, fmt::format("expected {} but found {}", expected, found), pos_);
    }

    [[noreturn]] static void type_error(std::size_t at, const std::string& message)
    {
        throw Error(ErrorCode::TypeMismatch, message, at);
    }

    Expr parse_expr(Slot slot)
    {
        skip_space();
        if (at_end())
            fail("an expression", "end of input");
        if (text_[pos_] == ')')
            fail("an expression", "')'");
        if (text_[pos_] == '(')
            return parse_compound(slot);
        return parse_atom(slot);
    }

    std::string read_word()
    {
        const std::size_t start = pos_;
        if (!at_end() && text_[pos_] == '"') {
            // quoted lexical form of a literal: "..."^^datatype
            ++pos_;
            while (!at_end() && text_[pos_] != '"')
                ++pos_;
            if (at_end())
                fail("closing '\"'", "end of input");
            ++pos_;
        }
        while (!at_end() && !is_delimiter(text_[pos_]))
            ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    Expr parse_atom(Slot slot)
    {
        const std::size_t start = pos_;
        std::string word = read_word();

        if (const auto sep = word.find("^^"); sep != std::string::npos) {
            std::string lexical = word.substr(0, sep);
            std::string datatype = word.substr(sep + 2);
            if (lexical.size() >= 2 && lexical.front() == '"' && lexical.back() == '"')
                lexical = lexical.substr(1, lexical.size() - 2);
            if (datatype.empty())
                throw Error(ErrorCode::SyntaxError, "expected a datatype after '^^'", pos_);
            if (slot == Slot::Binary)
                type_error(start, fmt::format("literal '{}' used where a relation is expected", word));
            if (slot == Slot::Literal && !is_numeric_datatype(datatype))
                type_error(start, fmt::format("comparative literal '{}' is not numeric", word));
            return Expr::literal(std::move(lexical), std::move(datatype));
        }
        if (slot == Slot::Literal)
            type_error(start, fmt::format("expected a typed literal `value^^datatype` but found '{}'", word));
        if (lookup_operator(word) && word.find('.') == std::string::npos)
            fail("an atom", fmt::format("operator '{}' outside parentheses", word));
        if (RefId::parse(word))
            return Expr::ref(std::move(word));
        if (slot == Slot::Binary) {
            if (is_entity_id(word))
                type_error(start, fmt::format("entity '{}' used where a relation is expected", word));
            return Expr::relation(std::move(word));
        }
        if (is_entity_id(word))
            return Expr::entity(std::move(word));
        return Expr::symbol(std::move(word));
    }

    Expr parse_compound(Slot slot)
    {
        const std::size_t open = pos_;
        ++pos_; // '('
        skip_space();
        const std::size_t head_pos = pos_;
        const std::string head = read_word();
        if (head.empty())
            fail("an operator", fmt::format("'{}'", peek_token()));
        const auto op = lookup_operator(head);
        if (!op) {
            pos_ = head_pos;
            fail("one of AND, COUNT, R, JOIN, ARGMAX, ARGMIN, LT, LE, GT, GE", fmt::format("'{}'", head));
        }

        std::vector<Expr> args;
        for (;;) {
            skip_space();
            if (at_end())
                fail("')'", "end of input");
            if (text_[pos_] == ')') {
                ++pos_;
                break;
            }
            args.push_back(parse_expr(arg_slot(*op, args.size(), slot)));
        }

        const std::size_t expected = expected_arity(*op);
        if (args.size() != expected)
            throw Error(ErrorCode::ArityError,
                        fmt::format("{} takes {} operand{} but got {}", op_name(*op), expected,
                                    expected == 1 ? "" : "s", args.size()),
                        open);

        Expr e = Expr::node(*op, std::move(args));
        check_slot(e, slot, open);
        return e;
    }

    static std::size_t expected_arity(Op op)
    {
        switch (op) {
        case Op::Count:
        case Op::Reverse: return 1;
        default: return 2;
        }
    }

    static Slot arg_slot(Op op, std::size_t index, Slot outer)
    {
        switch (op) {
        case Op::And:
        case Op::Count: return Slot::Unary;
        case Op::Reverse: return Slot::Binary;
        case Op::Join:
            if (index == 0)
                return Slot::Binary;
            if (outer == Slot::Binary)
                return Slot::Binary;
            if (outer == Slot::Unary)
                return Slot::Unary;
            return Slot::Any;
        case Op::ArgMax:
        case Op::ArgMin: return index == 0 ? Slot::Unary : Slot::Binary;
        default: return index == 0 ? Slot::Binary : Slot::Literal;
        }
    }

    static void check_slot(const Expr& e, Slot slot, std::size_t at)
    {
        const ValueKind kind = value_kind(e);
        switch (slot) {
        case Slot::Top: return;
        case Slot::Any:
            if (kind == ValueKind::Number)
                type_error(at, "COUNT is only allowed as the outermost operator");
            return;
        case Slot::Unary:
            if (kind == ValueKind::Binary || kind == ValueKind::Number)
                type_error(at, fmt::format("{} does not denote an entity set here", op_name(e.op)));
            return;
        case Slot::Binary:
            if (kind == ValueKind::Unary || kind == ValueKind::Number)
                type_error(at, fmt::format("{} does not denote a binary relation here", op_name(e.op)));
            return;
        case Slot::Literal: type_error(at, "expected a typed literal"); ;
        }
    }
};

void print_into(const Expr& e, std::string& out)
{
    switch (e.op) {
    case Op::Entity:
    case Op::Class:
    case Op::Relation:
    case Op::Ref:
    case Op::Symbol: out += e.name; return;
    case Op::Literal: {
        const bool quote = e.name.empty() || std::any_of(e.name.begin(), e.name.end(), [](char c) {
                               return is_delimiter(c) || c == '"';
                           });
        if (quote) {
            out += '"';
            out += e.name;
            out += '"';
        } else {
            out += e.name;
        }
        out += "^^";
        out += e.datatype;
        return;
    }
    default: break;
    }
    out += '(';
    out += op_name(e.op);
    for (const auto& a : e.args) {
        out += ' ';
        print_into(a, out);
    }
    out += ')';
}

void dump_into(const Expr& e, int depth, std::string& out)
{
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    switch (e.op) {
    case Op::Entity: out += "Entity " + e.name; break;
    case Op::Class: out += "Class " + e.name; break;
    case Op::Relation: out += "Relation " + e.name; break;
    case Op::Symbol: out += "Atom " + e.name; break;
    case Op::Ref: out += "Ref " + e.name; break;
    case Op::Literal: out += fmt::format("Literal {} ^^ {}", e.name, e.datatype); break;
    case Op::And: out += "And"; break;
    case Op::Count: out += "Count"; break;
    case Op::Reverse: out += "Reverse"; break;
    case Op::Join: out += "Join"; break;
    case Op::ArgMax: out += "ArgMax"; break;
    case Op::ArgMin: out += "ArgMin"; break;
    case Op::Lt: out += "Lt"; break;
    case Op::Le: out += "Le"; break;
    case Op::Gt: out += "Gt"; break;
    case Op::Ge: out += "Ge"; break;
    }
    out += '\n';
    for (const auto& a : e.args)
        dump_into(a, depth + 1, out);
}

void collect_refs_into(const Expr& e, std::vector<std::string>& out)
{
    if (e.op == Op::Ref) {
        if (std::find(out.begin(), out.end(), e.name) == out.end())
            out.push_back(e.name);
        return;
    }
    for (const auto& a : e.args)
        collect_refs_into(a, out);
}

Expr substitute(const Expr& e, const RefBindings& bindings, std::vector<std::string>& active)
{
    if (e.op == Op::Ref) {
        if (std::find(active.begin(), active.end(), e.name) != active.end())
            throw Error(ErrorCode::CyclicRef, fmt::format("reference cycle through '{}'", e.name));
        const auto it = bindings.find(e.name);
        if (it == bindings.end())
            throw Error(ErrorCode::UnboundRef, fmt::format("no binding for '{}'", e.name));
        active.push_back(e.name);
        Expr out = substitute(it->second, bindings, active);
        active.pop_back();
        return out;
    }
    if (e.atom())
        return e;
    Expr out{e.op, e.name, e.datatype, {}};
    out.args.reserve(e.args.size());
    for (const auto& a : e.args)
        out.args.push_back(substitute(a, bindings, active));
    return out;
}

// `b` is already canonical and sits in a binary position.
Expr push_reverse(const Expr& b)
{
    if (b.op == Op::Reverse)
        return b.args[0];
    if (b.op == Op::Join && value_kind(b) != ValueKind::Unary)
        return Expr::node(Op::Join, {push_reverse(b.args[1]), push_reverse(b.args[0])});
    return Expr::node(Op::Reverse, {b});
}

void schema_items_into(const Expr& e, bool binary_slot, SchemaItems& out)
{
    auto add = [](std::vector<std::string>& v, const std::string& s) {
        if (std::find(v.begin(), v.end(), s) == v.end())
            v.push_back(s);
    };
    switch (e.op) {
    case Op::Relation: add(out.relations, e.name); return;
    case Op::Class: add(out.classes, e.name); return;
    case Op::Symbol: add(binary_slot ? out.relations : out.classes, e.name); return;
    case Op::Entity:
    case Op::Literal:
    case Op::Ref: return;
    default: break;
    }
    for (std::size_t i = 0; i < e.args.size(); ++i) {
        bool binary = false;
        switch (e.op) {
        case Op::Reverse: binary = true; break;
        case Op::Join: binary = i == 0 || binary_slot; break;
        case Op::ArgMax:
        case Op::ArgMin: binary = i == 1; break;
        case Op::Lt:
        case Op::Le:
        case Op::Gt:
        case Op::Ge: binary = i == 0; break;
        default: break;
        }
        schema_items_into(e.args[i], binary, out);
    }
}

} // namespace

std::string_view op_name(Op op) noexcept
{
    switch (op) {
    case Op::Entity: return "entity";
    case Op::Class: return "class";
    case Op::Relation: return "relation";
    case Op::Literal: return "literal";
    case Op::Ref: return "ref";
    case Op::Symbol: return "atom";
    case Op::And: return "AND";
    case Op::Count: return "COUNT";
    case Op::Reverse: return "R";
    case Op::Join: return "JOIN";
    case Op::ArgMax: return "ARGMAX";
    case Op::ArgMin: return "ARGMIN";
    case Op::Lt: return "LT";
    case Op::Le: return "LE";
    case Op::Gt: return "GT";
    case Op::Ge: return "GE";
    }
    return "?";
}

std::optional<RefId> RefId::parse(std::string_view text)
{
    constexpr std::string_view prefix = "s-exp-";
    if (text.substr(0, prefix.size()) != prefix)
        return std::nullopt;
    text.remove_prefix(prefix.size());
    auto read_int = [](std::string_view& s) -> std::optional<int> {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr == s.data() || v < 1)
            return std::nullopt;
        s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
        return v;
    };
    RefId id;
    const auto task = read_int(text);
    if (!task)
        return std::nullopt;
    id.task = *task;
    if (!text.empty()) {
        if (text.front() != '.')
            return std::nullopt;
        text.remove_prefix(1);
        const auto step = read_int(text);
        if (!step || !text.empty())
            return std::nullopt;
        id.step = *step;
    }
    return id;
}

std::string RefId::str() const
{
    return step ? fmt::format("s-exp-{}.{}", task, *step) : fmt::format("s-exp-{}", task);
}

bool is_entity_id(std::string_view text) noexcept
{
    if (text.size() < 3 || (text[0] != 'm' && text[0] != 'g') || text[1] != '.')
        return false;
    return std::all_of(text.begin() + 2, text.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) || std::islower(static_cast<unsigned char>(c)) || c == '_';
    });
}

std::string normalize_datatype(std::string_view datatype)
{
    if (datatype.size() >= 2 && datatype.front() == '<' && datatype.back() == '>')
        datatype = datatype.substr(1, datatype.size() - 2);
    if (datatype.substr(0, 4) == "xsd:")
        return std::string(kXsdPrefix) + std::string(datatype.substr(4));
    return std::string(datatype);
}

bool is_numeric_datatype(std::string_view datatype)
{
    static const std::set<std::string, std::less<>> numeric = {
        "float", "double", "decimal", "integer", "int", "long", "short", "byte",
        "nonNegativeInteger", "positiveInteger", "negativeInteger", "nonPositiveInteger",
        "unsignedInt", "unsignedLong", "unsignedShort", "unsignedByte",
    };
    const std::string full = normalize_datatype(datatype);
    if (full.rfind(kXsdPrefix, 0) == 0)
        return numeric.contains(std::string_view(full).substr(kXsdPrefix.size()));
    return full == "type.int" || full == "type.float";
}

std::string literal_term(std::string_view lexical, std::string_view datatype)
{
    return fmt::format("{}^^{}", lexical, normalize_datatype(datatype));
}

Expr parse_sexpr(std::string_view text)
{
    return Parser(text).parse();
}

std::string print_sexpr(const Expr& expr)
{
    std::string out;
    print_into(expr, out);
    return out;
}

std::string dump_ast(const Expr& expr)
{
    std::string out;
    dump_into(expr, 0, out);
    return out;
}

bool has_refs(const Expr& expr)
{
    if (expr.op == Op::Ref)
        return true;
    return std::any_of(expr.args.begin(), expr.args.end(), [](const Expr& a) { return has_refs(a); });
}

std::vector<std::string> collect_refs(const Expr& expr)
{
    std::vector<std::string> out;
    collect_refs_into(expr, out);
    return out;
}

Expr substitute_refs(const Expr& expr, const RefBindings& bindings)
{
    std::vector<std::string> active;
    return substitute(expr, bindings, active);
}

Expr canonicalize(const Expr& expr)
{
    if (expr.atom())
        return expr;
    if (expr.op == Op::Reverse)
        return push_reverse(canonicalize(expr.args[0]));
    Expr out{expr.op, expr.name, expr.datatype, {}};
    out.args.reserve(expr.args.size());
    for (const auto& a : expr.args)
        out.args.push_back(canonicalize(a));
    if (out.op == Op::And && print_sexpr(out.args[1]) < print_sexpr(out.args[0]))
        std::swap(out.args[0], out.args[1]);
    return out;
}

bool semantic_equal(const Expr& a, const Expr& b)
{
    return print_sexpr(canonicalize(a)) == print_sexpr(canonicalize(b));
}

ValueKind value_kind(const Expr& expr) noexcept
{
    switch (expr.op) {
    case Op::Entity:
    case Op::Class:
    case Op::Literal: return ValueKind::Unary;
    case Op::Relation: return ValueKind::Binary;
    case Op::Ref:
    case Op::Symbol: return ValueKind::Unknown;
    case Op::Count: return ValueKind::Number;
    case Op::Reverse: return ValueKind::Binary;
    case Op::Join: {
        const ValueKind second = value_kind(expr.args[1]);
        if (second == ValueKind::Binary)
            return ValueKind::Binary;
        if (second == ValueKind::Unary)
            return ValueKind::Unary;
        return ValueKind::Unknown;
    }
    default: return ValueKind::Unary;
    }
}

SchemaItems schema_items(const Expr& expr)
{
    SchemaItems out;
    schema_items_into(expr, false, out);
    return out;
}

} // namespace kgqa
