// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "fixtures.hpp"

#include <kgqa/agent.hpp>
#include <kgqa/error.hpp>
#include <kgqa/llm.hpp>
#include <kgqa/trace.hpp>

#include <nlohmann/json.hpp>

#include <functional>

using namespace kgqa;

namespace {

class FnAdapter final : public LlmAdapter {
public:
    explicit FnAdapter(std::function<std::string(std::size_t)> f) : f_(std::move(f)) {}
    std::string complete(const std::vector<ChatMessage>& messages, const std::vector<std::string>&) override
    {
        last_messages = messages;
        return f_(calls++);
    }
    std::size_t calls = 0;
    std::vector<ChatMessage> last_messages;

private:
    std::function<std::string(std::size_t)> f_;
};


ReasoningTrace replay(const std::string& qid, Profile profile)
{
    const auto item = testing::worked_item(qid);
    auto llm = ScriptedAdapter::from_file(testing::fixture(qid + "/" + qid + ".trace.txt"), profile);
    AgentConfig config;
    config.profile = profile;
    std::vector<LinkedEntity> entities;
    for (const auto& e : item.entities)
        entities.push_back({e.mid, e.label});
    return run_agent(item.question, entities, testing::fixture_graph(), llm, config);
}

std::vector<LinkedEntity> ronny_entities() { return {{"m.04dwjbg", "Ronny"}}; }

} // namespace

TEST_CASE("parse_agent_output: the Ronny trace")
{
    const std::string text = testing::slurp(testing::fixture("ronny/ronny.trace.txt"));
    const auto events = parse_agent_output(text, Profile::Dara);
    REQUIRE(events.size() >= 10);
    CHECK(events[0].kind == EventKind::TaskHeader);
    CHECK(events[0].task == 1);
    CHECK(events[1].kind == EventKind::StepHeader);
    CHECK(events[2].kind == EventKind::Action);
    CHECK(events[2].name == "get_relations");
    CHECK(events[2].text == "m.04dwjbg");
    CHECK(events.back().kind == EventKind::FinalSexp);
    REQUIRE(events.back().expr);
    CHECK(print_sexpr(*events.back().expr) == "(JOIN (R olympics.olympic_mascot.olympic_games) m.04dwjbg)");
}

TEST_CASE("parse_agent_output: single final marker and ordering errors")
{
    const auto final = parse_agent_output("# Final s-exp:\n(COUNT s-exp-1)", Profile::Dara);
    REQUIRE(final.size() == 1);
    CHECK(final[0].kind == EventKind::FinalSexp);

    const std::string swapped = "# Task 1: t\n## Step 1.1:\n### Action 1.1.2: get_relations(m.x)\n### Obs 1.1.2: o\n"
                                "### Action 1.1.1: get_relations(m.x)\n";
    try {
        (void)parse_agent_output(swapped, Profile::Dara);
        FAIL("expected GrammarError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GrammarError);
    }
    const std::string nested = "# Task 1: t\n## Step 1.1:\n### Action 1.1.1: get_neighbors((JOIN r m.x), a.b)\n";
    const auto ev = parse_agent_output(nested, Profile::Dara);
    CHECK(ev.back().text == "(JOIN r m.x), a.b");
}

TEST_CASE("serialization round-trip")
{
    for (const auto& [qid, profile] : std::vector<std::pair<std::string, Profile>>{
             {"ronny", Profile::Dara}, {"snk", Profile::Dara}, {"rocket", Profile::DaraIcl}, {"comet", Profile::AgentBench}}) {
        const std::string text = testing::slurp(testing::fixture(qid + "/" + qid + ".trace.txt"));
        const auto once = serialize_events(parse_events(text, profile).events, profile);
        const auto twice = serialize_events(parse_events(once, profile).events, profile);
        CHECK(once == twice);
    }
}

TEST_CASE("scripted segments stop before observations")
{
    const std::string text = testing::slurp(testing::fixture("ronny/ronny.trace.txt"));
    const auto segs = script_segments(text, Profile::Dara);
    REQUIRE(segs.size() == 3);
    for (const auto& s : segs)
        CHECK(s.find("### Obs") == std::string::npos);
    CHECK(truncate_at_stop("abc### Obs 1", stop_sequences(Profile::Dara)) == "abc");
}

TEST_CASE("replay: shipped traces")
{
    const auto ronny = replay("ronny", Profile::Dara);
    CHECK(ronny.outcome == Outcome::Completed);
    REQUIRE(ronny.final_expr);
    CHECK(print_sexpr(*ronny.final_expr) == "(JOIN (R olympics.olympic_mascot.olympic_games) m.04dwjbg)");
    CHECK(ronny.text().find("### Obs 1.1.2: 1. the outgoing relation 'olympics.olympic_mascot.olympic_games'") !=
          std::string::npos);

    const auto snk = replay("snk", Profile::Dara);
    CHECK(snk.outcome == Outcome::Completed);
    CHECK(snk.text().find("(AND cvg.computer_game_compilation") != std::string::npos);
    CHECK(semantic_equal(*snk.final_expr, testing::worked_item("snk").gold));

    const auto comet = replay("comet", Profile::AgentBench);
    CHECK(comet.outcome == Outcome::Completed);
    REQUIRE(comet.final_expr);
    CHECK(print_sexpr(*comet.final_expr) == "(JOIN (R astronomy.comet.comet_group) m.0595vt)");

    const auto rocket = replay("rocket", Profile::DaraIcl);
    CHECK(rocket.outcome == Outcome::Completed);
    CHECK(semantic_equal(*rocket.final_expr, testing::worked_item("rocket").gold));

    for (const auto* qid : {"guitarhero", "pethealth"}) {
        const auto t = replay(qid, Profile::Dara);
        CHECK(t.outcome == Outcome::Completed);
        CHECK(semantic_equal(*t.final_expr, testing::worked_item(qid).gold));
    }
}

TEST_CASE("decomposition loop conformance: task forms resolve with earlier tasks only")
{
    for (const auto* qid : {"ronny", "snk", "guitarhero", "pethealth"}) {
        const auto t = replay(qid, Profile::Dara);
        RefBindings earlier;
        for (const auto& e : t.events) {
            if (e.kind != EventKind::TaskSexp || !e.expr)
                continue;
            const Expr resolved = substitute_refs(*e.expr, earlier);
            CHECK_FALSE(has_refs(resolved));
            CHECK_NOTHROW((void)evaluate(resolved, testing::fixture_graph()));
            earlier[RefId{e.task, std::nullopt}.str()] = resolved;
        }
    }
}

TEST_CASE("garbage twice gives parse_failure after one reprompt")
{
    FnAdapter llm([](std::size_t) { return std::string("I am not following the format at all."); });
    AgentConfig config;
    const auto t = run_dara("q?", ronny_entities(), testing::fixture_graph(), llm, config);
    CHECK(t.outcome == Outcome::ParseFailure);
    CHECK(llm.calls == 2);
    CHECK(t.events.back().kind == EventKind::Error);

    FnAdapter empty([](std::size_t) { return std::string(); });
    const auto e = run_dara("q?", ronny_entities(), testing::fixture_graph(), empty, config);
    CHECK(e.outcome == Outcome::ParseFailure);
}

TEST_CASE("reprompt recovers when the second answer is well formed")
{
    FnAdapter llm([](std::size_t i) {
        return i == 0 ? std::string("garbage")
                      : std::string("# Final s-exp:\n(JOIN (R olympics.olympic_mascot.olympic_games) m.04dwjbg)");
    });
    const auto t = run_dara("q?", ronny_entities(), testing::fixture_graph(), llm, AgentConfig{});
    CHECK(t.outcome == Outcome::Completed);
    CHECK(llm.last_messages.back().role == "user");
}

TEST_CASE("agentbench: early answer and action budget")
{
    AgentConfig config;
    config.profile = Profile::AgentBench;
    FnAdapter early([](std::size_t) { return std::string("Final Answer: #0"); });
    CHECK(run_agentbench("q?", ronny_entities(), testing::fixture_graph(), early, config).outcome == Outcome::ActionError);

    FnAdapter busy([](std::size_t) { return std::string("Thought: look around.\nAction: get_relations(m.04dwjbg)\n"); });
    const auto t = run_agentbench("q?", ronny_entities(), testing::fixture_graph(), busy, config);
    CHECK(t.outcome == Outcome::BudgetExhausted);
    CHECK(t.actions == 15);
    CHECK(busy.calls <= config.max_llm_calls());
}

TEST_CASE("dara: budgets bound the number of calls")
{
    AgentConfig config;
    config.max_tasks = 2;
    config.max_steps_per_task = 1;
    config.max_actions_per_step = 1;
    std::size_t task = 0;
    FnAdapter llm([&](std::size_t) {
        ++task;
        return "# Task " + std::to_string(task) + ": look\n## Step " + std::to_string(task) +
               ".1:\n### Action " + std::to_string(task) + ".1.1: get_relations(m.04dwjbg)\n";
    });
    const auto t = run_dara("q?", ronny_entities(), testing::fixture_graph(), llm, config);
    CHECK(t.outcome == Outcome::BudgetExhausted);
    CHECK(llm.calls <= config.max_llm_calls());
    CHECK(config.max_llm_calls() == 2 * 1 * (1 + 2));
}

TEST_CASE("action errors are observed, not fatal")
{
    FnAdapter llm([](std::size_t i) {
        if (i == 0)
            return std::string("# Task 1: t\n## Step 1.1:\n### Action 1.1.1: get_relations(nobody at all)\n");
        return std::string("# Final s-exp:\n(JOIN (R olympics.olympic_mascot.olympic_games) m.04dwjbg)");
    });
    const auto t = run_dara("q?", ronny_entities(), testing::fixture_graph(), llm, AgentConfig{});
    CHECK(t.outcome == Outcome::Completed);
    bool saw = false;
    for (const auto& e : t.events)
        saw = saw || (e.kind == EventKind::Obs && e.text.find("cannot resolve") != std::string::npos);
    CHECK(saw);
}

TEST_CASE("render_prompt")
{
    AgentConfig config;
    const auto dara = render_prompt(Profile::Dara, "what olympic games did ronny represent as a mascot?",
                                    ronny_entities(), "", config);
    REQUIRE(dara.size() == 1);
    CHECK(dara[0].role == "user");
    for (const char* f : {"get_relations(expression)", "get_classes(expression)", "get_relevant_relations(thought)",
                          "get_relevant_classes(thought)", "get_descriptions(candidate)"})
        CHECK(dara[0].content.find(f) != std::string::npos);
    CHECK(dara[0].content.find("The linked entity is Ronny (m.04dwjbg).") != std::string::npos);
    CHECK(dara == render_prompt(Profile::Dara, "what olympic games did ronny represent as a mascot?", ronny_entities(),
                                "", config));

    const auto ab = render_prompt(Profile::AgentBench, "q?", ronny_entities(), "", config);
    for (const char* f : {"get_relations(", "get_neighbors(", "intersection(", "get_attributes(", "argmax(", "argmin(",
                          "count("})
        CHECK(ab[0].content.find(f) != std::string::npos);
    CHECK(ab[0].content.find("at most 15 actions") != std::string::npos);

    const auto icl = render_prompt(Profile::DaraIcl, "q?", ronny_entities(), "so far", config);
    REQUIRE(icl.size() == 4);
    CHECK(icl[0].content.find("which bi-propellant rocket engines use unsymmetrical dimethylhydrazine") !=
          std::string::npos);
    CHECK(icl[1].role == "assistant");
    CHECK(icl[2].content.starts_with("Great! The new question is q?"));
    CHECK(icl[3].content == "so far");

    CHECK(entity_sentence({{"m.1", "A"}, {"m.2", "B"}}) == "The linked entities are A (m.1), and B (m.2).");
    CHECK(profile_actions(Profile::Dara).size() == 5);
    CHECK(profile_actions(Profile::AgentBench).size() == 7);
    CHECK(profile_actions(Profile::DaraIcl).size() == 16);
    try {
        (void)parse_profile("gpt");
        FAIL("expected UnknownProfile");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownProfile);
    }
}

TEST_CASE("config validation and metadata")
{
    AgentConfig bad;
    bad.max_tasks = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    const auto t = replay("ronny", Profile::Dara);
    const auto meta = trace_metadata(t, "ronny", 12.5);
    CHECK(meta.at("qid") == "ronny");
    CHECK(meta.at("outcome") == "completed");
    CHECK(meta.at("llm_calls") == 3);
}
