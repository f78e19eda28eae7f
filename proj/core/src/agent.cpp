// SPDX-License-Identifier: Apache-2.0
#include "kgqa/agent.hpp"

#include "kgqa/error.hpp"

#include "kgqa_prompts.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cctype>

namespace kgqa {

void AgentConfig::validate() const
{
    const std::pair<const char*, std::size_t> budgets[] = {
        {"topk", topk},
        {"deep_read_n", deep_read_n},
        {"max_tasks", max_tasks},
        {"max_steps_per_task", max_steps_per_task},
        {"max_actions_per_step", max_actions_per_step},
        {"baseline_max_actions", baseline_max_actions},
    };
    for (const auto& [name, value] : budgets)
        if (value < 1)
            throw Error(ErrorCode::ConfigError, fmt::format("agent.{} must be at least 1", name));
}

std::size_t AgentConfig::max_llm_calls() const
{
    if (profile == Profile::AgentBench)
        return baseline_max_actions + 1;
    return max_tasks * max_steps_per_task * (max_actions_per_step + 2);
}

std::string_view to_string(Outcome outcome) noexcept
{
    switch (outcome) {
    case Outcome::Completed: return "completed";
    case Outcome::BudgetExhausted: return "budget_exhausted";
    case Outcome::ParseFailure: return "parse_failure";
    case Outcome::ActionError: return "action_error";
    }
    return "action_error";
}

Outcome parse_outcome(std::string_view text)
{
    for (Outcome o : {Outcome::Completed, Outcome::BudgetExhausted, Outcome::ParseFailure, Outcome::ActionError})
        if (to_string(o) == text)
            return o;
    throw Error(ErrorCode::InvalidArgument, fmt::format("unknown outcome '{}'", text));
}

std::string entity_sentence(const std::vector<LinkedEntity>& entities)
{
    if (entities.empty())
        return {};
    std::vector<std::string> parts;
    for (const auto& e : entities)
        parts.push_back(e.label.empty() ? e.mid : fmt::format("{} ({})", e.label, e.mid));
    if (parts.size() == 1)
        return fmt::format("The linked entity is {}.", parts[0]);
    std::string list;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0)
            list += i + 1 == parts.size() ? ", and " : ", ";
        list += parts[i];
    }
    return fmt::format("The linked entities are {}.", list);
}

const std::vector<std::string>& profile_actions(Profile profile)
{
    static const std::vector<std::string> dara = {"get_relations", "get_relevant_relations", "get_classes",
                                                  "get_relevant_classes", "get_descriptions"};
    static const std::vector<std::string> agentbench = {"get_relations", "get_neighbors", "intersection",
                                                        "get_attributes", "argmax",        "argmin",
                                                        "count"};
    static const std::vector<std::string> icl = {
        "get_relations", "get_neighbors", "intersection", "get_relevant_relations",  "argmax",
        "argmin",        "count",         "get_classes",  "get_relevant_classes",    "lt",
        "le",            "gt",            "ge",           "get_descriptions",        "get_attributes",
        "get_relevant_attributes"};
    switch (profile) {
    case Profile::Dara: return dara;
    case Profile::DaraIcl: return icl;
    case Profile::AgentBench: return agentbench;
    }
    return dara;
}

namespace {

std::string fill(std::string_view tmpl, const std::vector<std::pair<std::string_view, std::string>>& vars)
{
    std::string out(tmpl);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r'))
        out.pop_back();
    for (const auto& [key, value] : vars) {
        const std::string needle = fmt::format("{{{}}}", key);
        for (auto pos = out.find(needle); pos != std::string::npos; pos = out.find(needle, pos + value.size()))
            out.replace(pos, needle.size(), value);
    }
    while (!out.empty() && out.back() == ' ')
        out.pop_back();
    return out;
}

std::size_t word_count(std::string_view s)
{
    std::size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word)
            ++n;
        in_word = !space;
    }
    return n;
}

std::string labels(const std::vector<LinkedEntity>& entities)
{
    std::vector<std::string> out;
    for (const auto& e : entities)
        out.push_back(e.label.empty() ? e.mid : e.label);
    return fmt::format("{}", fmt::join(out, ", "));
}

} // namespace

std::vector<ChatMessage> render_prompt(Profile profile, const std::string& question,
                                       const std::vector<LinkedEntity>& entities, const std::string& trace_so_far,
                                       const AgentConfig& config)
{
    std::vector<ChatMessage> out;
    const std::string max_actions = std::to_string(config.baseline_max_actions);
    switch (profile) {
    case Profile::Dara:
        out.push_back({"user", fill(prompts::dara_v1, {{"question", question}, {"entities", entity_sentence(entities)}})});
        break;
    case Profile::DaraIcl:
        out.push_back({"user", fill(prompts::dara_icl_v1, {{"max_actions", max_actions}})});
        out.push_back({"assistant", "Yes, I've understood your instruction and the demonstration."});
        out.push_back({"user", fill("Great! The new question is {question} {entities}",
                                    {{"question", question}, {"entities", entity_sentence(entities)}})});
        break;
    case Profile::AgentBench:
        out.push_back({"user", fill(prompts::agentbench_v1, {{"question", question},
                                                             {"entity_labels", labels(entities)},
                                                             {"max_actions", max_actions}})});
        break;
    }
    if (!trace_so_far.empty())
        out.push_back({"assistant", trace_so_far});
    return out;
}

namespace {

class Session {
public:
    Session(const std::string& question, const std::vector<LinkedEntity>& entities, const KnowledgeGraph& graph,
            LlmAdapter& llm, const AgentConfig& config, const Retriever& retriever)
        : llm_(llm), config_(config), env_(graph, retriever, config.topk), order_(config.profile)
    {
        config_.validate();
        trace_.question = question;
        trace_.entities = entities;
        trace_.profile = config.profile;
        env_.set_question(question);
        env_.set_allowed_actions(profile_actions(config.profile));
        env_.set_flat_relations(config.profile != Profile::Dara);
    }

    ReasoningTrace run()
    {
        const Profile profile = config_.profile;
        const auto stops = stop_sequences(profile);
        std::optional<std::string> correction;
        for (;;) {
            if (trace_.llm_calls >= config_.max_llm_calls())
                return close(Outcome::BudgetExhausted,
                             fmt::format("LLM call budget of {} exhausted", config_.max_llm_calls()));
            auto messages = render_prompt(profile, trace_.question, trace_.entities, trace_.events.empty() ? "" : trace_.text(),
                                          config_);
            if (correction)
                messages.push_back({"user", *correction});
            std::string output;
            try {
                output = truncate_at_stop(llm_.complete(messages, stops), stops);
            } catch (const std::exception& e) {
                return close(Outcome::ActionError, e.what());
            }
            ++trace_.llm_calls;
            for (const auto& m : messages)
                trace_.prompt_tokens += word_count(m.content);
            trace_.completion_tokens += word_count(output);

            ParsedOutput parsed = parse_events(output, profile);
            if (profile == Profile::AgentBench)
                renumber(parsed.events);
            std::vector<GrammarIssue> issues = parsed.issues;
            EventOrder probe = order_;
            for (const auto& e : parsed.events)
                if (auto problem = probe.check(e))
                    issues.push_back({e.line, *problem});
            if (parsed.events.empty() && issues.empty())
                issues.push_back({1, "no trace markers in model output"});
            if (!issues.empty()) {
                const std::string problem = fmt::format("line {}: {}", issues.front().line, issues.front().message);
                if (correction)
                    return close(Outcome::ParseFailure, fmt::format("unparsable output after a reprompt ({})", problem));
                correction = fmt::format("Your last output could not be parsed ({}). Continue the trajectory from where "
                                         "it stopped and use the exact trace markers.",
                                         problem);
                continue;
            }
            correction.reset();
            for (auto& e : parsed.events) {
                e.line = 0;
                if (auto done = apply(std::move(e)))
                    return *done;
            }
        }
    }

private:
    LlmAdapter& llm_;
    AgentConfig config_;
    ActionEnvironment env_;
    EventOrder order_;
    ReasoningTrace trace_;

    ReasoningTrace close(Outcome outcome, std::string message)
    {
        if (!message.empty()) {
            TraceEvent e;
            e.kind = EventKind::Error;
            e.text = std::move(message);
            trace_.events.push_back(std::move(e));
        }
        trace_.outcome = outcome;
        return trace_;
    }

    void renumber(std::vector<TraceEvent>& events) const
    {
        const int base = static_cast<int>(trace_.actions);
        for (auto& e : events)
            if (e.kind == EventKind::Action || e.kind == EventKind::Obs || e.kind == EventKind::Thought)
                e.action += base;
    }

    void push(TraceEvent e)
    {
        (void)order_.check(e);
        trace_.events.push_back(std::move(e));
    }

    std::optional<ReasoningTrace> finish(const Expr& written)
    {
        try {
            trace_.final_expr = substitute_refs(written, env_.refs());
        } catch (const Error& err) {
            return close(Outcome::ActionError, fmt::format("cannot resolve the final s-expression: {}", err.what()));
        }
        trace_.outcome = Outcome::Completed;
        return trace_;
    }

    std::optional<ReasoningTrace> apply(TraceEvent e)
    {
        const bool baseline = config_.profile == Profile::AgentBench;
        switch (e.kind) {
        case EventKind::TaskHeader:
            if (static_cast<std::size_t>(e.task) > config_.max_tasks)
                return close(Outcome::BudgetExhausted, fmt::format("task budget of {} exhausted", config_.max_tasks));
            env_.set_task(e.text);
            break;
        case EventKind::StepHeader:
            if (static_cast<std::size_t>(e.step) > config_.max_steps_per_task)
                return close(Outcome::BudgetExhausted,
                             fmt::format("step budget of {} per task exhausted", config_.max_steps_per_task));
            break;
        case EventKind::Action: {
            if (baseline ? trace_.actions >= config_.baseline_max_actions
                         : static_cast<std::size_t>(e.action) > config_.max_actions_per_step)
                return close(Outcome::BudgetExhausted,
                             baseline ? fmt::format("action budget of {} exhausted", config_.baseline_max_actions)
                                      : fmt::format("action budget of {} per step exhausted",
                                                    config_.max_actions_per_step));
            TraceEvent obs;
            obs.kind = EventKind::Obs;
            obs.task = e.task;
            obs.step = e.step;
            obs.action = e.action;
            try {
                obs.text = env_.execute(e.name, e.text).text;
            } catch (const Error& err) {
                obs.text = render_action_error(err);
            } catch (const std::exception& err) {
                obs.text = fmt::format("Error: {}", err.what());
            }
            ++trace_.actions;
            push(std::move(e));
            push(std::move(obs));
            return std::nullopt;
        }
        case EventKind::StepSexp:
            if (e.expr)
                env_.bind_ref(RefId{e.task, e.step}.str(), *e.expr);
            break;
        case EventKind::TaskSexp:
            if (e.expr)
                env_.bind_ref(RefId{e.task, std::nullopt}.str(), *e.expr);
            break;
        case EventKind::FinalSexp: {
            const Expr written = *e.expr;
            push(std::move(e));
            return finish(written);
        }
        case EventKind::FinalAnswer: {
            Expr expr;
            try {
                expr = env_.variable(e.text).expr;
            } catch (const Error& err) {
                push(std::move(e));
                return close(Outcome::ActionError, err.what());
            }
            push(std::move(e));
            TraceEvent final_event;
            final_event.kind = EventKind::FinalSexp;
            final_event.expr = expr;
            final_event.text = print_sexpr(expr);
            push(std::move(final_event));
            return finish(expr);
        }
        default: break;
        }
        push(std::move(e));
        return std::nullopt;
    }
};

} // namespace

ReasoningTrace run_dara(const std::string& question, const std::vector<LinkedEntity>& entities,
                        const KnowledgeGraph& graph, LlmAdapter& llm, const AgentConfig& config,
                        const Retriever& retriever)
{
    AgentConfig c = config;
    if (c.profile == Profile::AgentBench)
        c.profile = Profile::Dara;
    return Session(question, entities, graph, llm, c, retriever).run();
}

ReasoningTrace run_agentbench(const std::string& question, const std::vector<LinkedEntity>& entities,
                              const KnowledgeGraph& graph, LlmAdapter& llm, const AgentConfig& config,
                              const Retriever& retriever)
{
    AgentConfig c = config;
    c.profile = Profile::AgentBench;
    return Session(question, entities, graph, llm, c, retriever).run();
}

ReasoningTrace run_agent(const std::string& question, const std::vector<LinkedEntity>& entities,
                         const KnowledgeGraph& graph, LlmAdapter& llm, const AgentConfig& config,
                         const Retriever& retriever)
{
    if (config.profile == Profile::AgentBench)
        return run_agentbench(question, entities, graph, llm, config, retriever);
    return run_dara(question, entities, graph, llm, config, retriever);
}

nlohmann::json trace_metadata(const ReasoningTrace& trace, const std::string& qid, double wall_ms)
{
    nlohmann::json doc;
    doc["qid"] = qid;
    doc["profile"] = std::string(to_string(trace.profile));
    doc["outcome"] = std::string(to_string(trace.outcome));
    doc["wall_time_ms"] = wall_ms;
    doc["llm_calls"] = trace.llm_calls;
    doc["prompt_tokens"] = trace.prompt_tokens;
    doc["completion_tokens"] = trace.completion_tokens;
    doc["actions"] = trace.actions;
    doc["final_sexp"] = trace.final_expr ? nlohmann::json(print_sexpr(*trace.final_expr)) : nlohmann::json(nullptr);
    return doc;
}

} // namespace kgqa
