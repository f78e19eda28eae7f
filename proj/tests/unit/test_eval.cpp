// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fixtures.hpp"

#include <kgqa/error.hpp>
#include <kgqa/eval.hpp>
#include <kgqa/synth.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

using namespace kgqa;

namespace {

DatasetItem item(const std::string& qid, const std::string& sexpr, Source source = Source::Fixture)
{
    DatasetItem it;
    it.qid = qid;
    it.question = qid;
    it.gold = parse_sexpr(sexpr);
    it.source = source;
    return it;
}

Prediction pred(const std::string& qid, const std::string& sexpr)
{
    Prediction p;
    p.qid = qid;
    p.expr = parse_sexpr(sexpr);
    p.outcome = "completed";
    return p;
}

Prediction failure(const std::string& qid)
{
    Prediction p;
    p.qid = qid;
    p.outcome = "parse_failure";
    return p;
}

// Independent F1: counts via std::set_intersection, mirrors the textbook formula.
double f1_oracle(const EntitySet& p, const EntitySet& g)
{
    if (p.empty() && g.empty())
        return 1.0;
    if (p.empty() || g.empty())
        return 0.0;
    std::vector<std::string> common;
    std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(common));
    if (common.empty())
        return 0.0;
    const double prec = double(common.size()) / double(p.size());
    const double rec = double(common.size()) / double(g.size());
    return 2 * prec * rec / (prec + rec);
}

EntitySet random_set(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> size(0, 6), elem(0, 9);
    EntitySet s;
    for (int n = size(rng); n > 0; --n)
        s.insert("e" + std::to_string(elem(rng)));
    return s;
}

} // namespace

TEST_CASE("exact_match")
{
    const auto g = parse_sexpr("(AND food.dish (JOIN food.dish.ingredients m.06x4c))");
    CHECK(exact_match(g, g));
    CHECK(exact_match(parse_sexpr("(AND (JOIN food.dish.ingredients m.06x4c) food.dish)"), g));
    CHECK_FALSE(exact_match(parse_sexpr("(AND food.dish (JOIN dining.cuisine.dishes m.06x4c))"), g));
}

TEST_CASE("answer_f1 examples")
{
    CHECK(answer_f1({"a", "b"}, {"b", "c"}) == doctest::Approx(0.5));
    CHECK(answer_f1({"a", "b"}, {"a", "b"}) == 1.0);
    CHECK(answer_f1({}, {"a"}) == 0.0);
    CHECK(answer_f1({"a"}, {}) == 0.0);
    CHECK(answer_f1({}, {}) == 1.0);
    CHECK(answer_f1({"a"}, {"b"}) == 0.0);
}

TEST_CASE("property: answer_f1 matches the oracle, is symmetric and bounded")
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_set(rng);
        const auto b = random_set(rng);
        const double f = answer_f1(a, b);
        CHECK(f == doctest::Approx(f1_oracle(a, b)));
        CHECK(f == answer_f1(b, a));
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
    }
}

TEST_CASE("zero_shot_filter examples")
{
    const std::vector<DatasetItem> train = {item("t1", "(JOIN r1 m.0a)")};
    const std::vector<DatasetItem> test = {
        item("x1", "(JOIN r1 (JOIN r2 m.0b))"),
        item("x2", "(JOIN r1 m.0c)"),
        item("x3", "(JOIN r2 (JOIN r3 m.0d))"),
    };
    auto qids = [](const std::vector<DatasetItem>& items) {
        std::vector<std::string> out;
        for (const auto& i : items)
            out.push_back(i.qid);
        return out;
    };
    CHECK(qids(zero_shot_filter(test, train)) == std::vector<std::string>{"x1", "x3"});
    CHECK(qids(zero_shot_filter(test, train, ZeroShotReading::Strict)) == std::vector<std::string>{"x3"});
    CHECK(qids(zero_shot_filter(test, {})) == std::vector<std::string>{"x1", "x2", "x3"});
}

TEST_CASE("property: zero_shot_filter is a subset and monotone in train")
{
    std::mt19937_64 rng(5);
    const KnowledgeGraph graph = random_graph(rng);
    std::vector<DatasetItem> pool;
    for (int i = 0; i < 60; ++i)
        pool.push_back(item("q" + std::to_string(i), print_sexpr(random_expr(rng, graph))));
    const std::vector<DatasetItem> test(pool.begin(), pool.begin() + 30);
    for (const auto reading : {ZeroShotReading::AtLeastOne, ZeroShotReading::Strict}) {
        std::size_t previous = test.size() + 1;
        for (std::size_t n = 0; n <= 30; n += 5) {
            const std::vector<DatasetItem> train(pool.begin() + 30, pool.begin() + 30 + long(n));
            const auto kept = zero_shot_filter(test, train, reading);
            CHECK(kept.size() <= previous);
            previous = kept.size();
            for (const auto& k : kept)
                CHECK(std::any_of(test.begin(), test.end(), [&](const DatasetItem& t) { return t.qid == k.qid; }));
        }
    }
}

TEST_CASE("evaluate_run: all correct and all failures")
{
    const auto& graph = testing::fixture_graph();
    const std::vector<DatasetItem> dataset = {testing::worked_item("ronny"), testing::worked_item("comet")};
    std::vector<Prediction> right, wrong;
    for (const auto& d : dataset) {
        right.push_back(pred(d.qid, print_sexpr(d.gold)));
        wrong.push_back(failure(d.qid));
    }
    const auto good = evaluate_run(right, dataset, graph_executor(graph));
    CHECK(good.overall.em == 100.0);
    CHECK(good.overall.f1 == 100.0);
    const auto bad = evaluate_run(wrong, dataset, graph_executor(graph));
    CHECK(bad.overall.em == 0.0);
    CHECK(bad.overall.f1 == 0.0);
    CHECK(bad.items[0].outcome == "parse_failure");
}

TEST_CASE("evaluate_run: mixed fixture scores em 50 and f1 62.5")
{
    const auto& graph = testing::fixture_graph();
    const auto dataset = load_dataset(testing::fixture("eval/dataset.jsonl"));
    const auto predictions = load_predictions(testing::fixture("eval/predictions.jsonl"));
    const auto report = evaluate_run(predictions, dataset, graph_executor(graph), 3);
    REQUIRE(report.items.size() == 4);
    CHECK(report.overall.n == 4);

    // Oracle: recompute each item from first principles.
    double f1_sum = 0;
    int em = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& p = predictions[i];
        REQUIRE(p.qid == dataset[i].qid);
        if (p.expr) {
            em += exact_match(*p.expr, dataset[i].gold) ? 1 : 0;
            f1_sum += f1_oracle(evaluate(*p.expr, graph).answers(), evaluate(dataset[i].gold, graph).answers());
        }
    }
    CHECK(report.overall.em == doctest::Approx(100.0 * em / 4));
    CHECK(report.overall.f1 == doctest::Approx(100.0 * f1_sum / 4));
    CHECK(report.overall.em == doctest::Approx(50.0));
    CHECK(report.overall.f1 == doctest::Approx(62.5));
    CHECK(report.items[2].f1 == doctest::Approx(0.5));
    CHECK(report.table().find("em 50.0 f1 62.5") != std::string::npos);

    double mean = 0;
    for (const auto& s : report.items)
        mean += s.f1;
    CHECK(report.overall.f1 == doctest::Approx(100.0 * mean / report.items.size()));

    const auto doc = report.to_json();
    CHECK(doc["items"].size() == 4);
    CHECK(doc["by_source"]["fixture"]["n"] == 4);
}

TEST_CASE("evaluate_run rejects unknown qids")
{
    const auto& graph = testing::fixture_graph();
    const std::vector<DatasetItem> dataset = {testing::worked_item("ronny")};
    try {
        (void)evaluate_run({pred("nope", "(JOIN (R astronomy.comet.comet_group) m.0595vt)")}, dataset,
                           graph_executor(graph));
        FAIL("expected UnknownQid");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownQid);
    }
}

TEST_CASE("evaluate_run aggregates per source")
{
    const auto& graph = testing::fixture_graph();
    auto a = testing::worked_item("ronny");
    a.source = Source::GrailQA;
    auto b = testing::worked_item("comet");
    b.source = Source::WebQSP;
    const auto report =
        evaluate_run({pred(a.qid, print_sexpr(a.gold)), failure(b.qid)}, {a, b}, graph_executor(graph));
    CHECK(report.by_source.at("grailqa").em == 100.0);
    CHECK(report.by_source.at("webqsp").em == 0.0);
    CHECK(report.overall.em == 50.0);
}

TEST_CASE("property: exact match implies answer F1 of 1")
{
    std::mt19937_64 rng(9);
    int checked = 0;
    for (int g = 0; g < 5; ++g) {
        const KnowledgeGraph graph = random_graph(rng);
        for (int i = 0; i < 40; ++i) {
            const Expr e = random_expr(rng, graph);
            const Expr f = random_expr(rng, graph);
            for (const auto& [p, q] : {std::pair{e, e}, std::pair{e, f}}) {
                if (!exact_match(p, q))
                    continue;
                CHECK(answer_f1(evaluate(p, graph).answers(), evaluate(q, graph).answers()) == 1.0);
                ++checked;
            }
        }
    }
    CHECK(checked >= 200);
}

TEST_CASE("dataset and prediction files round-trip")
{
    const auto dir = testing::scratch_dir("eval_roundtrip");
    const auto items = load_dataset(testing::fixture("datasets/worked.jsonl"));
    save_dataset(dir / "d.jsonl", items);
    const auto back = load_dataset(dir / "d.jsonl");
    REQUIRE(back.size() == items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        CHECK(back[i].qid == items[i].qid);
        CHECK(back[i].gold == items[i].gold);
        CHECK(back[i].entities.size() == items[i].entities.size());
    }
    const auto preds = load_predictions(testing::fixture("eval/predictions.jsonl"));
    save_predictions(dir / "p.jsonl", preds);
    const auto preds_back = load_predictions(dir / "p.jsonl");
    REQUIRE(preds_back.size() == preds.size());
    CHECK_FALSE(preds_back[3].expr.has_value());
    CHECK(preds_back[3].outcome == "budget_exhausted");
}

TEST_CASE("load_dataset rejects duplicate qids")
{
    const auto dir = testing::scratch_dir("eval_dup");
    {
        std::ofstream out(dir / "dup.jsonl");
        out << R"j({"qid": "a", "question": "q", "sexpression": "(JOIN r m.0a)", "split": "test"})j" << "\n";
        out << R"j({"qid": "a", "question": "q", "sexpression": "(JOIN r m.0b)", "split": "test"})j" << "\n";
    }
    CHECK_THROWS_AS((void)load_dataset(dir / "dup.jsonl"), Error);
}

TEST_CASE("converters")
{
    const auto grail = nlohmann::json::parse(R"j([
        {"qid": 101, "question": "q1", "s_expression": "(JOIN r m.0a)",
         "graph_query": {"nodes": [{"node_type": "entity", "id": "m.0a", "friendly_name": "A"},
                                   {"node_type": "class", "id": "c", "friendly_name": "C"}]},
         "answer": [{"answer_argument": "m.0b"}]},
        {"qid": 102, "question": "q2", "s_expression": null},
        {"qid": 103, "question": "q3", "s_expression": "(JOIN r"}
    ])j");
    const auto g = convert_grailqa_style(grail, Source::GrailQA, Split::Dev);
    REQUIRE(g.items.size() == 1);
    CHECK(g.skipped == 2);
    CHECK(g.items[0].qid == "101");
    CHECK(g.items[0].split == Split::Dev);
    REQUIRE(g.items[0].entities.size() == 1);
    CHECK(g.items[0].entities[0].mid == "m.0a");
    CHECK(g.items[0].answers == EntitySet{"m.0b"});

    const auto webqsp = nlohmann::json::parse(R"j({"Questions": [
        {"QuestionId": "WebQTest-1", "RawQuestion": "who?",
         "Parses": [{"SExpr": "null"}, {"SExpr": "(JOIN r m.0c)", "TopicEntityMid": "m.0c", "TopicEntityName": "C"}]},
        {"QuestionId": "WebQTest-2", "RawQuestion": "what?", "Parses": [{"SExpr": "null"}]}
    ]})j");
    const auto w = convert_webqsp(webqsp, Split::Test);
    REQUIRE(w.items.size() == 1);
    CHECK(w.skipped == 1);
    CHECK(w.items[0].source == Source::WebQSP);
    CHECK(print_sexpr(w.items[0].gold) == "(JOIN r m.0c)");
    CHECK(w.items[0].entities[0].label == "C");
}
