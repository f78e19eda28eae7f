// SPDX-License-Identifier: Apache-2.0
//
// A deliberately small SPARQL evaluator: PREFIX, SELECT [DISTINCT] with
// variables or COUNT/MAX/MIN aggregates, basic graph patterns, VALUES, FILTER
// comparisons / isNumeric, and nested sub-selects. It shares nothing with the
// logical-form evaluator except the graph indexes and numeric parsing.
#include "kgqa/error.hpp"
#include "kgqa/sparql.hpp"

#include "http.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <variant>

namespace kgqa {

namespace {

enum class Tok { Iri, PName, Var, String, Number, Punct, Word, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::string datatype; // String tokens: raw datatype term, Iri or PName form
    std::size_t pos = 0;
};

[[noreturn]] void parse_fail(std::size_t pos, const std::string& msg)
{
    throw Error(ErrorCode::QueryParseError, msg, pos);
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        for (;;) {
            skip();
            Token t = next();
            out.push_back(t);
            if (t.kind == Tok::End)
                return out;
        }
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    bool at_end() const { return pos_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

    void skip()
    {
        while (!at_end()) {
            if (std::isspace(static_cast<unsigned char>(peek()))) {
                ++pos_;
            } else if (peek() == '#') {
                while (!at_end() && peek() != '\n')
                    ++pos_;
            } else {
                break;
            }
        }
    }

    static bool name_char(char c)
    {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' || c == ':' || c == '%';
    }

    std::optional<std::string> try_iri()
    {
        std::size_t end = pos_ + 1;
        while (end < text_.size() && text_[end] != '>') {
            if (std::isspace(static_cast<unsigned char>(text_[end])) || text_[end] == '<')
                return std::nullopt;
            ++end;
        }
        if (end >= text_.size() || end == pos_ + 1)
            return std::nullopt;
        std::string iri(text_.substr(pos_ + 1, end - pos_ - 1));
        pos_ = end + 1;
        return iri;
    }

    std::string read_pname()
    {
        const std::size_t start = pos_;
        while (!at_end() && name_char(peek()))
            ++pos_;
        while (pos_ > start && text_[pos_ - 1] == '.')
            --pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    Token next()
    {
        Token t;
        t.pos = pos_;
        if (at_end())
            return t;
        const char c = peek();
        if (c == '<') {
            if (auto iri = try_iri()) {
                t.kind = Tok::Iri;
                t.text = *iri;
                return t;
            }
            t.kind = Tok::Punct;
            t.text = peek(1) == '=' ? "<=" : "<";
            pos_ += t.text.size();
            return t;
        }
        if (c == '>' || c == '!' || c == '=') {
            t.kind = Tok::Punct;
            if (c != '=' && peek(1) == '=') {
                t.text = std::string{c, '='};
                pos_ += 2;
            } else if (c == '!') {
                parse_fail(pos_, "unexpected '!'");
            } else {
                t.text = std::string(1, c);
                ++pos_;
            }
            return t;
        }
        if (std::string_view("{}().,*").find(c) != std::string_view::npos) {
            t.kind = Tok::Punct;
            t.text = std::string(1, c);
            ++pos_;
            return t;
        }
        if (c == '?' || c == '$') {
            ++pos_;
            const std::size_t start = pos_;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
                ++pos_;
            if (pos_ == start)
                parse_fail(t.pos, "empty variable name");
            t.kind = Tok::Var;
            t.text = std::string(text_.substr(start, pos_ - start));
            return t;
        }
        if (c == '"') {
            ++pos_;
            std::string value;
            while (!at_end() && peek() != '"') {
                if (peek() == '\\' && pos_ + 1 < text_.size())
                    ++pos_;
                value += peek();
                ++pos_;
            }
            if (at_end())
                parse_fail(t.pos, "unterminated string literal");
            ++pos_;
            t.kind = Tok::String;
            t.text = std::move(value);
            if (peek() == '^' && peek(1) == '^') {
                pos_ += 2;
                if (peek() == '<') {
                    auto iri = try_iri();
                    if (!iri)
                        parse_fail(pos_, "malformed datatype IRI");
                    t.datatype = "<" + *iri + ">";
                } else {
                    t.datatype = read_pname();
                    if (t.datatype.empty())
                        parse_fail(pos_, "missing datatype after '^^'");
                }
            }
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            ((c == '-' || c == '+') && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            const std::size_t start = pos_++;
            while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == 'e' ||
                                 peek() == 'E'))
                ++pos_;
            while (pos_ > start + 1 && text_[pos_ - 1] == '.')
                --pos_;
            t.kind = Tok::Number;
            t.text = std::string(text_.substr(start, pos_ - start));
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == ':') {
            std::string word = read_pname();
            t.kind = word.find(':') != std::string::npos ? Tok::PName : Tok::Word;
            t.text = std::move(word);
            return t;
        }
        parse_fail(pos_, fmt::format("unexpected character '{}'", c));
    }
};

// ---- query model ------------------------------------------------------------

struct Slot {
    bool is_var = false;
    std::string value; // variable name or KG term
};

struct TriplePattern {
    Slot s, p, o;
};

struct ValuesClause {
    std::string var;
    std::vector<std::string> terms;
};

struct Filter {
    enum class Kind { Compare, IsNumeric, Constant } kind = Kind::Constant;
    std::string op;
    Slot lhs, rhs;
    bool constant = false;
};

struct SelectQuery;

struct SubSelect {
    std::shared_ptr<SelectQuery> query;
};

using GroupElement = std::variant<TriplePattern, ValuesClause, Filter, SubSelect>;

struct Projection {
    std::string var;       // plain variable projection
    std::string aggregate; // COUNT / MAX / MIN, empty for plain
    bool agg_distinct = false;
    std::string alias;
};

struct SelectQuery {
    bool distinct = false;
    std::vector<Projection> projections;
    std::vector<GroupElement> where;
};

bool keyword(const Token& t, std::string_view word)
{
    if (t.kind != Tok::Word || t.text.size() != word.size())
        return false;
    for (std::size_t i = 0; i < word.size(); ++i)
        if (std::toupper(static_cast<unsigned char>(t.text[i])) != std::toupper(static_cast<unsigned char>(word[i])))
            return false;
    return true;
}

class QueryParser {
public:
    explicit QueryParser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    SelectQuery parse()
    {
        while (keyword(peek(), "PREFIX")) {
            advance();
            const Token name = advance();
            if (name.kind != Tok::PName || name.text.back() != ':')
                parse_fail(name.pos, "expected a prefix name ending in ':'");
            const Token iri = advance();
            if (iri.kind != Tok::Iri)
                parse_fail(iri.pos, "expected an IRI for the prefix");
            prefixes_[name.text.substr(0, name.text.size() - 1)] = iri.text;
        }
        SelectQuery q = select();
        if (peek().kind != Tok::End)
            parse_fail(peek().pos, fmt::format("unexpected '{}' after query", peek().text));
        return q;
    }

private:
    std::vector<Token> tokens_;
    std::size_t i_ = 0;
    std::map<std::string, std::string> prefixes_;

    const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(i_ + ahead, tokens_.size() - 1)]; }
    Token advance()
    {
        Token t = peek();
        if (i_ < tokens_.size() - 1)
            ++i_;
        return t;
    }

    void expect_punct(std::string_view p)
    {
        const Token t = advance();
        if (t.kind != Tok::Punct || t.text != p)
            parse_fail(t.pos, fmt::format("expected '{}' but found '{}'", p, t.text));
    }

    bool accept_punct(std::string_view p)
    {
        if (peek().kind == Tok::Punct && peek().text == p) {
            advance();
            return true;
        }
        return false;
    }

    std::string expand(const Token& t)
    {
        if (t.kind == Tok::Iri)
            return t.text;
        const auto colon = t.text.find(':');
        const auto it = prefixes_.find(t.text.substr(0, colon));
        if (it == prefixes_.end())
            parse_fail(t.pos, fmt::format("undeclared prefix in '{}'", t.text));
        return it->second + t.text.substr(colon + 1);
    }

    static std::string kg_id(const std::string& iri)
    {
        if (iri.rfind(kFreebaseNs, 0) == 0)
            return iri.substr(kFreebaseNs.size());
        return iri;
    }

    std::string term(const Token& t)
    {
        switch (t.kind) {
        case Tok::Iri:
        case Tok::PName: return kg_id(expand(t));
        case Tok::String: {
            if (t.datatype.empty())
                return literal_term(t.text, "http://www.w3.org/2001/XMLSchema#string");
            Token dt;
            if (t.datatype.front() == '<') {
                dt.kind = Tok::Iri;
                dt.text = t.datatype.substr(1, t.datatype.size() - 2);
            } else {
                dt.kind = Tok::PName;
                dt.text = t.datatype;
            }
            dt.pos = t.pos;
            return literal_term(t.text, kg_id(expand(dt)));
        }
        case Tok::Number: {
            const bool integral = t.text.find_first_of(".eE") == std::string::npos;
            return literal_term(t.text, integral ? "http://www.w3.org/2001/XMLSchema#integer"
                                                 : "http://www.w3.org/2001/XMLSchema#decimal");
        }
        default: parse_fail(t.pos, fmt::format("expected an RDF term but found '{}'", t.text));
        }
    }

    Slot slot()
    {
        const Token t = advance();
        if (t.kind == Tok::Var)
            return {true, t.text};
        return {false, term(t)};
    }

    SelectQuery select()
    {
        if (!keyword(advance(), "SELECT"))
            parse_fail(peek().pos, "expected SELECT");
        SelectQuery q;
        if (keyword(peek(), "DISTINCT")) {
            advance();
            q.distinct = true;
        }
        while (!keyword(peek(), "WHERE") && !(peek().kind == Tok::Punct && peek().text == "{")) {
            if (peek().kind == Tok::Var) {
                q.projections.push_back({advance().text, {}, false, {}});
                continue;
            }
            if (accept_punct("(")) {
                Projection p;
                const Token agg = advance();
                if (!keyword(agg, "COUNT") && !keyword(agg, "MAX") && !keyword(agg, "MIN"))
                    parse_fail(agg.pos, fmt::format("unsupported aggregate '{}'", agg.text));
                p.aggregate = agg.text;
                std::transform(p.aggregate.begin(), p.aggregate.end(), p.aggregate.begin(),
                               [](unsigned char c) { return std::toupper(c); });
                expect_punct("(");
                if (keyword(peek(), "DISTINCT")) {
                    advance();
                    p.agg_distinct = true;
                }
                const Token v = advance();
                if (v.kind != Tok::Var)
                    parse_fail(v.pos, "expected a variable inside the aggregate");
                p.var = v.text;
                expect_punct(")");
                if (!keyword(advance(), "AS"))
                    parse_fail(peek().pos, "expected AS");
                const Token alias = advance();
                if (alias.kind != Tok::Var)
                    parse_fail(alias.pos, "expected an alias variable");
                p.alias = alias.text;
                expect_punct(")");
                q.projections.push_back(std::move(p));
                continue;
            }
            parse_fail(peek().pos, fmt::format("unexpected '{}' in projection", peek().text));
        }
        if (q.projections.empty())
            parse_fail(peek().pos, "empty projection");
        if (keyword(peek(), "WHERE"))
            advance();
        q.where = group();
        return q;
    }

    std::vector<GroupElement> group()
    {
        expect_punct("{");
        std::vector<GroupElement> out;
        for (;;) {
            const Token& t = peek();
            if (t.kind == Tok::End)
                parse_fail(t.pos, "unterminated group");
            if (accept_punct("}"))
                return out;
            if (accept_punct("."))
                continue;
            if (keyword(t, "FILTER")) {
                advance();
                out.emplace_back(filter());
                continue;
            }
            if (keyword(t, "VALUES")) {
                advance();
                ValuesClause v;
                const Token var = advance();
                if (var.kind != Tok::Var)
                    parse_fail(var.pos, "VALUES needs a variable");
                v.var = var.text;
                expect_punct("{");
                while (!accept_punct("}")) {
                    if (peek().kind == Tok::End)
                        parse_fail(peek().pos, "unterminated VALUES block");
                    v.terms.push_back(term(advance()));
                }
                out.emplace_back(std::move(v));
                continue;
            }
            if (t.kind == Tok::Punct && t.text == "{") {
                advance();
                auto sub = std::make_shared<SelectQuery>(select());
                expect_punct("}");
                out.emplace_back(SubSelect{std::move(sub)});
                continue;
            }
            TriplePattern tp{slot(), slot(), slot()};
            if (tp.p.is_var)
                parse_fail(t.pos, "variable predicates are not supported");
            out.emplace_back(std::move(tp));
        }
    }

    Filter filter()
    {
        expect_punct("(");
        Filter f;
        if (keyword(peek(), "isNumeric")) {
            advance();
            expect_punct("(");
            f.kind = Filter::Kind::IsNumeric;
            f.lhs = slot();
            expect_punct(")");
        } else if (keyword(peek(), "false") || keyword(peek(), "true")) {
            f.kind = Filter::Kind::Constant;
            f.constant = keyword(advance(), "true");
        } else {
            f.kind = Filter::Kind::Compare;
            f.lhs = slot();
            const Token op = advance();
            static const std::vector<std::string> ops = {"=", "!=", "<", "<=", ">", ">="};
            if (op.kind != Tok::Punct || std::find(ops.begin(), ops.end(), op.text) == ops.end())
                parse_fail(op.pos, fmt::format("unsupported FILTER operator '{}'", op.text));
            f.op = op.text;
            f.rhs = slot();
        }
        expect_punct(")");
        return f;
    }
};

// ---- evaluation -------------------------------------------------------------

using Solution = std::map<std::string, std::string>;

class Engine {
public:
    explicit Engine(const KnowledgeGraph& graph) : graph_(graph) {}

    std::vector<Solution> run(const SelectQuery& q)
    {
        std::vector<Solution> rows = group(q.where);
        const bool aggregate = std::any_of(q.projections.begin(), q.projections.end(),
                                           [](const Projection& p) { return !p.aggregate.empty(); });
        std::vector<Solution> out;
        if (aggregate) {
            Solution row;
            for (const auto& p : q.projections) {
                if (p.aggregate.empty())
                    throw Error(ErrorCode::QueryParseError, "mixing aggregates and plain variables needs GROUP BY");
                if (auto v = aggregate_value(p, rows))
                    row[p.alias] = *v;
            }
            out.push_back(std::move(row));
            return out;
        }
        for (const auto& r : rows) {
            Solution projected;
            for (const auto& p : q.projections)
                if (const auto it = r.find(p.var); it != r.end())
                    projected[p.var] = it->second;
            out.push_back(std::move(projected));
        }
        if (q.distinct) {
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
        }
        return out;
    }

private:
    const KnowledgeGraph& graph_;

    static std::optional<std::string> aggregate_value(const Projection& p, const std::vector<Solution>& rows)
    {
        std::vector<std::string> values;
        for (const auto& r : rows)
            if (const auto it = r.find(p.var); it != r.end())
                values.push_back(it->second);
        if (p.aggregate == "COUNT") {
            if (p.agg_distinct) {
                std::sort(values.begin(), values.end());
                values.erase(std::unique(values.begin(), values.end()), values.end());
            }
            return literal_term(std::to_string(values.size()), "http://www.w3.org/2001/XMLSchema#integer");
        }
        std::optional<std::string> best;
        std::optional<Decimal> best_value;
        for (const auto& v : values) {
            const auto n = numeric_value(v);
            if (!n)
                continue;
            if (!best_value || (p.aggregate == "MAX" ? *n > *best_value : *n < *best_value)) {
                best_value = n;
                best = v;
            }
        }
        return best;
    }

    static bool compatible(const Solution& a, const Solution& b)
    {
        for (const auto& [k, v] : b)
            if (const auto it = a.find(k); it != a.end() && it->second != v)
                return false;
        return true;
    }

    static std::optional<std::string> value_of(const Slot& s, const Solution& row)
    {
        if (!s.is_var)
            return s.value;
        const auto it = row.find(s.value);
        if (it == row.end())
            return std::nullopt;
        return it->second;
    }

    static bool bind(Solution& row, const Slot& s, const std::string& value)
    {
        if (!s.is_var)
            return s.value == value;
        auto [it, inserted] = row.try_emplace(s.value, value);
        return inserted || it->second == value;
    }

    void match(const TriplePattern& tp, const Solution& row, std::vector<Solution>& out) const
    {
        const auto s = value_of(tp.s, row);
        const auto o = value_of(tp.o, row);
        auto emit = [&](const std::string& subject, const std::string& object) {
            Solution next = row;
            if (bind(next, tp.s, subject) && bind(next, tp.o, object))
                out.push_back(std::move(next));
        };

        if (tp.p.value == kTypePredicate) {
            const auto& schema = graph_.schema();
            if (s) {
                for (const auto& c : schema.classes_of(*s))
                    emit(*s, c);
            } else if (o) {
                for (const auto& e : schema.instances_of(*o))
                    emit(e, *o);
            } else {
                for (const auto& c : schema.class_names())
                    for (const auto& e : schema.instances_of(c))
                        emit(e, c);
            }
            return;
        }
        if (s) {
            for (const auto& edge : graph_.outgoing(*s))
                if (edge.predicate == tp.p.value)
                    emit(*s, edge.node);
        } else if (o) {
            for (const auto& edge : graph_.incoming(*o))
                if (edge.predicate == tp.p.value)
                    emit(edge.node, *o);
        } else {
            for (const auto& [subject, object] : graph_.pairs(tp.p.value))
                emit(subject, object);
        }
    }

    static bool passes(const Filter& f, const Solution& row)
    {
        switch (f.kind) {
        case Filter::Kind::Constant: return f.constant;
        case Filter::Kind::IsNumeric: {
            const auto v = value_of(f.lhs, row);
            return v && numeric_value(*v).has_value();
        }
        case Filter::Kind::Compare: break;
        }
        const auto a = value_of(f.lhs, row);
        const auto b = value_of(f.rhs, row);
        if (!a || !b)
            return false;
        const auto na = numeric_value(*a);
        const auto nb = numeric_value(*b);
        if (na && nb) {
            const auto c = *na <=> *nb;
            if (f.op == "=")
                return c == 0;
            if (f.op == "!=")
                return c != 0;
            if (f.op == "<")
                return c < 0;
            if (f.op == "<=")
                return c <= 0;
            if (f.op == ">")
                return c > 0;
            return c >= 0;
        }
        if (f.op == "=")
            return *a == *b;
        if (f.op == "!=")
            return *a != *b;
        return false; // ordering of non-numeric terms is a type error
    }

    std::vector<Solution> group(const std::vector<GroupElement>& elements)
    {
        std::vector<Solution> rows(1);
        std::vector<const Filter*> filters;
        for (const auto& element : elements) {
            if (const auto* tp = std::get_if<TriplePattern>(&element)) {
                std::vector<Solution> next;
                for (const auto& r : rows)
                    match(*tp, r, next);
                rows = std::move(next);
            } else if (const auto* values = std::get_if<ValuesClause>(&element)) {
                std::vector<Solution> next;
                for (const auto& r : rows)
                    for (const auto& term : values->terms) {
                        Solution n = r;
                        if (bind(n, Slot{true, values->var}, term))
                            next.push_back(std::move(n));
                    }
                rows = std::move(next);
            } else if (const auto* f = std::get_if<Filter>(&element)) {
                filters.push_back(f);
            } else {
                const auto& sub = std::get<SubSelect>(element);
                const std::vector<Solution> inner = run(*sub.query);
                std::vector<Solution> next;
                for (const auto& r : rows)
                    for (const auto& i : inner)
                        if (compatible(r, i)) {
                            Solution merged = r;
                            merged.insert(i.begin(), i.end());
                            next.push_back(std::move(merged));
                        }
                rows = std::move(next);
            }
        }
        std::erase_if(rows, [&](const Solution& r) {
            return !std::all_of(filters.begin(), filters.end(), [&](const Filter* f) { return passes(*f, r); });
        });
        return rows;
    }
};

} // namespace

Denotation execute_sparql(std::string_view query, const KnowledgeGraph& graph)
{
    const SelectQuery q = QueryParser(Lexer(query).run()).parse();
    const std::vector<Solution> rows = Engine(graph).run(q);

    if (q.projections.size() == 1 && q.projections[0].aggregate == "COUNT") {
        const auto it = rows.front().find(q.projections[0].alias);
        const auto n = it == rows.front().end() ? std::nullopt : numeric_value(it->second);
        return Denotation(n ? std::stoll(n->to_string()) : std::int64_t{0});
    }
    if (q.projections.size() == 2 && q.projections[0].aggregate.empty()) {
        PairSet out;
        for (const auto& r : rows) {
            const auto a = r.find(q.projections[0].var);
            const auto b = r.find(q.projections[1].var);
            if (a != r.end() && b != r.end())
                out.emplace(a->second, b->second);
        }
        return Denotation(std::move(out));
    }
    const std::string& var = q.projections[0].aggregate.empty() ? q.projections[0].var : q.projections[0].alias;
    EntitySet out;
    for (const auto& r : rows)
        if (const auto it = r.find(var); it != r.end())
            out.insert(it->second);
    return Denotation(std::move(out));
}

namespace {

std::string term_from_binding(const nlohmann::json& b)
{
    const std::string type = b.value("type", "");
    const std::string value = b.at("value").get<std::string>();
    if (type == "uri") {
        if (value.rfind(kFreebaseNs, 0) == 0)
            return value.substr(kFreebaseNs.size());
        return value;
    }
    std::string datatype = b.value("datatype", "http://www.w3.org/2001/XMLSchema#string");
    if (datatype.rfind(kFreebaseNs, 0) == 0)
        datatype = datatype.substr(kFreebaseNs.size());
    return literal_term(value, datatype);
}

} // namespace

Denotation denotation_from_sparql_json(std::string_view body)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProviderError, fmt::format("malformed SPARQL JSON results: {}", e.what()));
    }
    try {
        const auto& vars = doc.at("head").at("vars");
        const auto& rows = doc.at("results").at("bindings");
        if (vars.empty())
            return Denotation(EntitySet{});
        const std::string var = vars.front().get<std::string>();
        if (vars.size() == 1 && var == "count") {
            if (rows.empty() || !rows.front().contains(var))
                return Denotation(std::int64_t{0});
            return Denotation(static_cast<std::int64_t>(std::stoll(rows.front().at(var).at("value").get<std::string>())));
        }
        EntitySet out;
        for (const auto& row : rows)
            if (row.contains(var))
                out.insert(term_from_binding(row.at(var)));
        return Denotation(std::move(out));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProviderError, fmt::format("unexpected SPARQL JSON results shape: {}", e.what()));
    } catch (const std::logic_error& e) {
        throw Error(ErrorCode::ProviderError, fmt::format("non-integer COUNT binding: {}", e.what()));
    }
}

SparqlEndpoint::SparqlEndpoint(std::string url, std::chrono::seconds timeout) : url_(std::move(url)), timeout_(timeout)
{
}

Denotation SparqlEndpoint::query(const std::string& sparql) const
{
    const auto res = detail::http_post(url_, sparql, "application/sparql-query",
                                       {{"Accept", "application/sparql-results+json"}}, timeout_);
    if (res.status < 200 || res.status >= 300)
        throw Error(ErrorCode::ProviderError, fmt::format("SPARQL endpoint {} returned HTTP {}", url_, res.status));
    return denotation_from_sparql_json(res.body);
}

} // namespace kgqa
