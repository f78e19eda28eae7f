// SPDX-License-Identifier: Apache-2.0
//
// Reasoning traces: the event model, the marker grammar used in agent output
// and trace files, and its serialization.
#pragma once

#include "kgqa/sexpr.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgqa {

enum class Profile { Dara, DaraIcl, AgentBench };

std::string_view to_string(Profile profile) noexcept;
/// "dara", "dara_icl" or "agentbench"; throws UnknownProfile.
Profile parse_profile(std::string_view text);

enum class EventKind {
    TaskHeader, // task, text
    StepHeader, // task, step
    Action,     // task, step, action, name, text = raw arguments
    Obs,        // task, step, action, text
    Thought,    // task, step, action, text
    StepSexp,   // task, step, text, expr
    TaskSexp,   // task, text, expr
    FinalSexp,  // text, expr
    FinalAnswer, // text = "#<id>"
    Error,      // text
};

std::string_view to_string(EventKind kind) noexcept;

struct TraceEvent {
    EventKind kind = EventKind::Thought;
    int task = 0;
    int step = 0;
    int action = 0;
    std::string name;
    std::string text;
    std::optional<Expr> expr; // s-expression events whose body parsed
    std::size_t line = 0;     // 1-based line in the parsed text, 0 when synthesized

    /// Same event ignoring the source line.
    [[nodiscard]] bool same(const TraceEvent& other) const;
};

struct GrammarIssue {
    std::size_t line = 0;
    std::string message;
};

struct ParsedOutput {
    std::vector<TraceEvent> events;
    std::vector<GrammarIssue> issues;
};

/// Lenient scan: every recognised marker becomes an event; malformed bodies
/// (unparsable s-expressions, actions without a call) are reported as issues
/// and their events kept without `expr`.
[[nodiscard]] ParsedOutput parse_events(std::string_view text, Profile profile);

/// Incremental ordering rules: monotone indices, one Obs per Action before the
/// next Action, a final event at most once and last.
class EventOrder {
public:
    explicit EventOrder(Profile profile) : profile_(profile) {}
    /// Returns a description of the violation, or nullopt if `e` is acceptable.
    std::optional<std::string> check(const TraceEvent& e);
    [[nodiscard]] bool awaiting_obs() const noexcept { return pending_action_.has_value(); }
    [[nodiscard]] bool finished() const noexcept { return finished_; }

private:
    Profile profile_;
    int task_ = 0;
    int step_ = 0;
    int action_ = 0;
    std::optional<TraceEvent> pending_action_;
    bool finished_ = false;
    bool final_answer_seen_ = false;
    bool final_sexp_seen_ = false;
};

[[nodiscard]] std::vector<GrammarIssue> order_issues(const std::vector<TraceEvent>& events, Profile profile);

/// Strict parse of one generation segment: throws GrammarError(line, message)
/// on the first grammar or ordering problem.
[[nodiscard]] std::vector<TraceEvent> parse_agent_output(std::string_view text, Profile profile);

/// Canonical text, one marker per line, in the profile's surface format.
[[nodiscard]] std::string serialize_events(const std::vector<TraceEvent>& events, Profile profile);
[[nodiscard]] std::string serialize_event(const TraceEvent& event, Profile profile);

/// Splits `name(args)` into its parts; nullopt when malformed.
struct ActionCall {
    std::string name;
    std::string args;
};
[[nodiscard]] std::optional<ActionCall> parse_action_call(std::string_view text);

/// Offsets of every marker in `text`: (kind, marker start, body start).
struct MarkerSpan {
    EventKind kind;
    std::size_t start;
    std::size_t body;
};
[[nodiscard]] std::vector<MarkerSpan> find_markers(std::string_view text, Profile profile);

/// Marker a model must not generate itself: the runtime writes observations.
[[nodiscard]] std::vector<std::string> stop_sequences(Profile profile);

} // namespace kgqa
