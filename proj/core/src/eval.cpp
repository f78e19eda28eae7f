// SPDX-License-Identifier: Apache-2.0
#include "kgqa/eval.hpp"

#include "kgqa/error.hpp"
#include "kgqa/sparql.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <future>
#include <set>

namespace kgqa {

using nlohmann::json;

std::string_view to_string(Source source) noexcept
{
    switch (source) {
    case Source::GrailQA: return "grailqa";
    case Source::GraphQ: return "graphq";
    case Source::WebQSP: return "webqsp";
    case Source::Fixture: return "fixture";
    }
    return "fixture";
}

std::string_view to_string(Split split) noexcept
{
    switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
    }
    return "test";
}

Source parse_source(std::string_view text)
{
    for (Source s : {Source::GrailQA, Source::GraphQ, Source::WebQSP, Source::Fixture})
        if (to_string(s) == text)
            return s;
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown source '{}'", text));
}

Split parse_split(std::string_view text)
{
    for (Split s : {Split::Train, Split::Dev, Split::Test})
        if (to_string(s) == text)
            return s;
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown split '{}'", text));
}

namespace {

std::vector<LinkedEntity> entities_from_json(const json& doc)
{
    std::vector<LinkedEntity> out;
    if (doc.is_null())
        return out;
    if (!doc.is_array())
        throw Error(ErrorCode::ParseError, "entities must be an array");
    for (const auto& e : doc) {
        if (e.is_array() && e.size() == 2)
            out.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
        else if (e.is_object())
            out.push_back({e.at("mid").get<std::string>(), e.value("label", std::string{})});
        else if (e.is_string())
            out.push_back({e.get<std::string>(), {}});
        else
            throw Error(ErrorCode::ParseError, "entity entries must be {mid, label} or [mid, label]");
    }
    return out;
}

EntitySet answers_from_json(const json& doc)
{
    EntitySet out;
    for (const auto& a : doc)
        out.insert(a.is_string() ? a.get<std::string>() : a.dump());
    return out;
}

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, fmt::format("cannot open {}", path.string()));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            f(json::parse(line), lineno);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, fmt::format("{}:{}: {}", path.string(), lineno, e.what()), lineno);
        } catch (const Error& e) {
            if (e.position() && e.code() == ErrorCode::ParseError)
                throw;
            throw Error(ErrorCode::ParseError, fmt::format("{}:{}: {}", path.string(), lineno, e.what()), lineno);
        }
    }
}

void write_lines(const std::filesystem::path& path, const std::vector<json>& docs)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
    for (const auto& d : docs)
        out << d.dump() << '\n';
}

} // namespace

DatasetItem dataset_item_from_json(const json& doc)
{
    try {
        DatasetItem item;
        item.qid = doc.at("qid").is_string() ? doc.at("qid").get<std::string>() : doc.at("qid").dump();
        item.question = doc.at("question").get<std::string>();
        item.gold = parse_sexpr(doc.at("sexpression").get<std::string>());
        if (has_refs(item.gold))
            throw Error(ErrorCode::ParseError, fmt::format("gold form of {} contains references", item.qid));
        item.entities = entities_from_json(doc.value("entities", json()));
        item.source = parse_source(doc.value("source", std::string("fixture")));
        item.split = parse_split(doc.value("split", std::string("test")));
        if (doc.contains("answers") && !doc["answers"].is_null())
            item.answers = answers_from_json(doc["answers"]);
        return item;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, fmt::format("malformed dataset record: {}", e.what()));
    }
}

json to_json(const DatasetItem& item)
{
    json entities = json::array();
    for (const auto& e : item.entities)
        entities.push_back({{"mid", e.mid}, {"label", e.label}});
    json doc = {{"qid", item.qid},
                {"question", item.question},
                {"sexpression", print_sexpr(item.gold)},
                {"entities", entities},
                {"source", std::string(to_string(item.source))},
                {"split", std::string(to_string(item.split))}};
    if (item.answers)
        doc["answers"] = *item.answers;
    return doc;
}

std::vector<DatasetItem> load_dataset(const std::filesystem::path& path)
{
    std::vector<DatasetItem> items;
    std::set<std::string> seen;
    for_each_line(path, [&](const json& doc, std::size_t lineno) {
        auto item = dataset_item_from_json(doc);
        if (!seen.insert(item.qid).second)
            throw Error(ErrorCode::ParseError, fmt::format("duplicate qid '{}'", item.qid), lineno);
        items.push_back(std::move(item));
    });
    return items;
}

void save_dataset(const std::filesystem::path& path, const std::vector<DatasetItem>& items)
{
    std::vector<json> docs;
    for (const auto& item : items)
        docs.push_back(to_json(item));
    write_lines(path, docs);
}

ConversionResult convert_grailqa_style(const json& doc, Source source, Split split)
{
    ConversionResult out;
    for (const auto& rec : doc) {
        const auto sexp = rec.value("s_expression", json());
        if (!sexp.is_string() || sexp.get<std::string>().empty() || sexp.get<std::string>() == "null") {
            ++out.skipped;
            continue;
        }
        DatasetItem item;
        try {
            item.gold = parse_sexpr(sexp.get<std::string>());
        } catch (const Error&) {
            ++out.skipped;
            continue;
        }
        item.qid = rec.at("qid").is_string() ? rec.at("qid").get<std::string>() : rec.at("qid").dump();
        item.question = rec.value("question", std::string{});
        item.source = source;
        item.split = split;
        if (rec.contains("graph_query"))
            for (const auto& node : rec["graph_query"].value("nodes", json::array()))
                if (node.value("node_type", std::string{}) == "entity")
                    item.entities.push_back({node.value("id", std::string{}), node.value("friendly_name", std::string{})});
        if (rec.contains("answer") && rec["answer"].is_array()) {
            EntitySet answers;
            for (const auto& a : rec["answer"])
                answers.insert(a.value("answer_argument", std::string{}));
            item.answers = std::move(answers);
        }
        out.items.push_back(std::move(item));
    }
    return out;
}

ConversionResult convert_webqsp(const json& doc, Split split)
{
    ConversionResult out;
    for (const auto& q : doc.at("Questions")) {
        const json* chosen = nullptr;
        const json parses = q.value("Parses", json::array());
        for (const auto& parse : parses) {
            const auto sexp = parse.value("SExpr", json());
            if (sexp.is_string() && !sexp.get<std::string>().empty() && sexp.get<std::string>() != "null") {
                chosen = &parse;
                break;
            }
        }
        if (!chosen) {
            ++out.skipped;
            continue;
        }
        DatasetItem item;
        try {
            item.gold = parse_sexpr((*chosen)["SExpr"].get<std::string>());
        } catch (const Error&) {
            ++out.skipped;
            continue;
        }
        item.qid = q.at("QuestionId").get<std::string>();
        item.question = q.value("RawQuestion", q.value("ProcessedQuestion", std::string{}));
        item.source = Source::WebQSP;
        item.split = split;
        const auto mid = chosen->value("TopicEntityMid", json());
        if (mid.is_string())
            item.entities.push_back({mid.get<std::string>(), chosen->value("TopicEntityName", std::string{})});
        out.items.push_back(std::move(item));
    }
    return out;
}

bool exact_match(const Expr& pred, const Expr& gold) { return semantic_equal(pred, gold); }

double answer_f1(const EntitySet& pred, const EntitySet& gold)
{
    if (pred.empty() && gold.empty())
        return 1.0;
    if (pred.empty() || gold.empty())
        return 0.0;
    std::size_t common = 0;
    for (const auto& a : pred)
        common += gold.count(a);
    if (common == 0)
        return 0.0;
    const double p = static_cast<double>(common) / static_cast<double>(pred.size());
    const double r = static_cast<double>(common) / static_cast<double>(gold.size());
    return 2.0 * p * r / (p + r);
}

std::vector<DatasetItem> zero_shot_filter(const std::vector<DatasetItem>& test, const std::vector<DatasetItem>& train,
                                          ZeroShotReading reading)
{
    std::set<std::string, std::less<>> seen;
    for (const auto& item : train) {
        auto items = schema_items(item.gold);
        seen.insert(items.relations.begin(), items.relations.end());
        seen.insert(items.classes.begin(), items.classes.end());
    }
    std::vector<DatasetItem> out;
    for (const auto& item : test) {
        auto items = schema_items(item.gold);
        std::vector<std::string> all = items.relations;
        all.insert(all.end(), items.classes.begin(), items.classes.end());
        const auto unseen = [&](const std::string& s) { return !seen.contains(s); };
        const bool keep = reading == ZeroShotReading::Strict ? !all.empty() && std::all_of(all.begin(), all.end(), unseen)
                                                             : std::any_of(all.begin(), all.end(), unseen);
        if (keep)
            out.push_back(item);
    }
    return out;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path)
{
    std::vector<Prediction> out;
    for_each_line(path, [&](const json& doc, std::size_t) {
        Prediction p;
        p.qid = doc.at("qid").is_string() ? doc.at("qid").get<std::string>() : doc.at("qid").dump();
        const auto sexp = doc.value("sexpression", json());
        if (sexp.is_string()) {
            try {
                p.expr = parse_sexpr(sexp.get<std::string>());
            } catch (const Error&) {
                p.outcome = "unparsable";
            }
        }
        if (doc.contains("answers") && doc["answers"].is_array())
            p.answers = answers_from_json(doc["answers"]);
        if (doc.contains("outcome") && doc["outcome"].is_string())
            p.outcome = doc["outcome"].get<std::string>();
        if (p.outcome.empty())
            p.outcome = p.expr ? "completed" : "failure";
        out.push_back(std::move(p));
    });
    return out;
}

void save_predictions(const std::filesystem::path& path, const std::vector<Prediction>& predictions)
{
    std::vector<json> docs;
    for (const auto& p : predictions) {
        json doc = {{"qid", p.qid}, {"sexpression", p.expr ? json(print_sexpr(*p.expr)) : json(nullptr)}};
        if (p.answers)
            doc["answers"] = *p.answers;
        doc["outcome"] = p.outcome;
        docs.push_back(std::move(doc));
    }
    write_lines(path, docs);
}

Executor graph_executor(const KnowledgeGraph& graph)
{
    return [&graph](const Expr& e) { return evaluate(e, graph).answers(); };
}

Executor endpoint_executor(const SparqlEndpoint& endpoint, const SchemaView& schema)
{
    return [&endpoint, &schema](const Expr& e) { return endpoint.query(compile_sparql(e, schema)).answers(); };
}

namespace {

ItemScore score_item(const DatasetItem& item, const Prediction* pred, const Executor& executor)
{
    ItemScore s;
    s.qid = item.qid;
    s.source = item.source;
    if (!pred) {
        s.outcome = "missing";
        return s;
    }
    s.outcome = pred->outcome;
    if (!pred->expr)
        return s;
    if (has_refs(*pred->expr)) {
        s.note = "prediction contains unresolved references";
        return s;
    }
    s.em = exact_match(*pred->expr, item.gold);

    std::optional<EntitySet> gold = item.answers;
    std::optional<EntitySet> got;
    if (executor) {
        try {
            if (!gold)
                gold = executor(item.gold);
        } catch (const std::exception& e) {
            s.note = fmt::format("gold form failed to evaluate: {}", e.what());
        }
        try {
            got = executor(*pred->expr);
        } catch (const std::exception& e) {
            s.note = fmt::format("prediction failed to evaluate: {}", e.what());
        }
    }
    if (!got)
        got = pred->answers;
    if (gold && got)
        s.f1 = answer_f1(*got, *gold);
    else if (s.em)
        s.f1 = 1.0;
    return s;
}

Aggregate aggregate(const std::vector<const ItemScore*>& scores)
{
    Aggregate a;
    a.n = scores.size();
    if (a.n == 0)
        return a;
    double em = 0, f1 = 0;
    for (const auto* s : scores) {
        em += s->em ? 1.0 : 0.0;
        f1 += s->f1;
    }
    a.em = 100.0 * em / static_cast<double>(a.n);
    a.f1 = 100.0 * f1 / static_cast<double>(a.n);
    return a;
}

} // namespace

EvalReport evaluate_run(const std::vector<Prediction>& predictions, const std::vector<DatasetItem>& dataset,
                        const Executor& executor, std::size_t jobs)
{
    std::map<std::string, const DatasetItem*, std::less<>> by_qid;
    for (const auto& item : dataset)
        by_qid.emplace(item.qid, &item);
    std::map<std::string, const Prediction*, std::less<>> pred_by_qid;
    std::vector<std::string> unknown;
    for (const auto& p : predictions) {
        if (!by_qid.contains(p.qid))
            unknown.push_back(p.qid);
        else
            pred_by_qid[p.qid] = &p;
    }
    if (!unknown.empty())
        throw Error(ErrorCode::UnknownQid, fmt::format("unknown qid(s): {}", fmt::join(unknown, ", ")));

    EvalReport report;
    report.items.resize(dataset.size());
    const auto score_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto it = pred_by_qid.find(dataset[i].qid);
            report.items[i] = score_item(dataset[i], it == pred_by_qid.end() ? nullptr : it->second, executor);
        }
    };
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, dataset.size()));
    if (jobs == 1) {
        score_range(0, dataset.size());
    } else {
        std::vector<std::future<void>> work;
        const std::size_t chunk = (dataset.size() + jobs - 1) / jobs;
        for (std::size_t b = 0; b < dataset.size(); b += chunk)
            work.push_back(std::async(std::launch::async, score_range, b, std::min(dataset.size(), b + chunk)));
        for (auto& w : work)
            w.get();
    }

    std::vector<const ItemScore*> all;
    std::map<std::string, std::vector<const ItemScore*>> groups;
    for (const auto& s : report.items) {
        all.push_back(&s);
        groups[std::string(to_string(s.source))].push_back(&s);
    }
    report.overall = aggregate(all);
    for (const auto& [source, scores] : groups)
        report.by_source[source] = aggregate(scores);
    return report;
}

json EvalReport::to_json() const
{
    const auto agg = [](const Aggregate& a) { return json{{"n", a.n}, {"em", a.em}, {"f1", a.f1}}; };
    json doc;
    json rows = json::array();
    for (const auto& s : items) {
        json row = {{"qid", s.qid},
                    {"source", std::string(kgqa::to_string(s.source))},
                    {"em", s.em},
                    {"f1", s.f1},
                    {"outcome", s.outcome}};
        if (s.note)
            row["note"] = *s.note;
        rows.push_back(std::move(row));
    }
    doc["items"] = std::move(rows);
    doc["overall"] = agg(overall);
    json sources = json::object();
    for (const auto& [name, a] : by_source)
        sources[name] = agg(a);
    doc["by_source"] = std::move(sources);
    doc["zero_shot_items"] = zero_shot_items ? json(*zero_shot_items) : json(nullptr);
    return doc;
}

std::string EvalReport::table() const
{
    std::string out = fmt::format("{:<10} {:>6} {:>6} {:>6}\n", "source", "n", "em", "f1");
    for (const auto& [name, a] : by_source)
        out += fmt::format("{:<10} {:>6} {:>6.1f} {:>6.1f}\n", name, a.n, a.em, a.f1);
    out += fmt::format("{:<10} {:>6} {:>6.1f} {:>6.1f}\n", "overall", overall.n, overall.em, overall.f1);
    if (zero_shot_items)
        out += fmt::format("zero-shot items: {}\n", *zero_shot_items);
    out += fmt::format("em {:.1f} f1 {:.1f}\n", overall.em, overall.f1);
    return out;
}

} // namespace kgqa
