// SPDX-License-Identifier: Apache-2.0
//
// The decomposition-and-grounding agent loop and the numbered-variable
// baseline loop, driven by an LlmAdapter.
#pragma once

#include "kgqa/action_space.hpp"
#include "kgqa/graph.hpp"
#include "kgqa/llm.hpp"
#include "kgqa/retrieval.hpp"
#include "kgqa/trace.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace kgqa {

struct AgentConfig {
    std::size_t topk = 5;
    std::size_t deep_read_n = 2;
    std::size_t max_tasks = 10;
    std::size_t max_steps_per_task = 5;
    std::size_t max_actions_per_step = 4;
    std::size_t baseline_max_actions = 15;
    Profile profile = Profile::Dara;

    /// Throws ConfigError when a budget is zero.
    void validate() const;
    /// Upper bound on LLM calls for one session of this profile.
    [[nodiscard]] std::size_t max_llm_calls() const;
};

struct LinkedEntity {
    std::string mid;
    std::string label;

    friend bool operator==(const LinkedEntity&, const LinkedEntity&) = default;
};

enum class Outcome { Completed, BudgetExhausted, ParseFailure, ActionError };

std::string_view to_string(Outcome outcome) noexcept;
Outcome parse_outcome(std::string_view text);

struct ReasoningTrace {
    std::string question;
    std::vector<LinkedEntity> entities;
    Profile profile = Profile::Dara;
    std::vector<TraceEvent> events;
    Outcome outcome = Outcome::ParseFailure;
    /// Final logical form with every Ref resolved.
    std::optional<Expr> final_expr;
    std::size_t llm_calls = 0;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    std::size_t actions = 0;

    [[nodiscard]] std::string text() const { return serialize_events(events, profile); }
};

/// "The linked entity is A (m.x)." / "The linked entities are A (m.x), and B (m.y)."
[[nodiscard]] std::string entity_sentence(const std::vector<LinkedEntity>& entities);

/// Actions the profile exposes to the model.
[[nodiscard]] const std::vector<std::string>& profile_actions(Profile profile);

/// Prompt for the next generation: the profile template with the question,
/// followed by the trace so far as an assistant turn.
[[nodiscard]] std::vector<ChatMessage> render_prompt(Profile profile, const std::string& question,
                                                     const std::vector<LinkedEntity>& entities,
                                                     const std::string& trace_so_far, const AgentConfig& config);

/// Iterative decomposition and grounding (profiles dara and dara_icl).
/// Failures are reported through the outcome and an Error event.
[[nodiscard]] ReasoningTrace run_dara(const std::string& question, const std::vector<LinkedEntity>& entities,
                                      const KnowledgeGraph& graph, LlmAdapter& llm, const AgentConfig& config,
                                      const Retriever& retriever = Retriever());

/// Thought/Action/Observation loop over numbered variables.
[[nodiscard]] ReasoningTrace run_agentbench(const std::string& question, const std::vector<LinkedEntity>& entities,
                                            const KnowledgeGraph& graph, LlmAdapter& llm, const AgentConfig& config,
                                            const Retriever& retriever = Retriever());

/// Dispatches on config.profile.
[[nodiscard]] ReasoningTrace run_agent(const std::string& question, const std::vector<LinkedEntity>& entities,
                                       const KnowledgeGraph& graph, LlmAdapter& llm, const AgentConfig& config,
                                       const Retriever& retriever = Retriever());

/// Sidecar document for a trace file.
[[nodiscard]] nlohmann::json trace_metadata(const ReasoningTrace& trace, const std::string& qid, double wall_ms);

} // namespace kgqa
