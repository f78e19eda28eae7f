// SPDX-License-Identifier: Apache-2.0
#include "kgqa/trace.hpp"

#include "kgqa/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

namespace kgqa {

std::string_view to_string(Profile profile) noexcept
{
    switch (profile) {
    case Profile::Dara: return "dara";
    case Profile::DaraIcl: return "dara_icl";
    case Profile::AgentBench: return "agentbench";
    }
    return "dara";
}

Profile parse_profile(std::string_view text)
{
    if (text == "dara")
        return Profile::Dara;
    if (text == "dara_icl")
        return Profile::DaraIcl;
    if (text == "agentbench")
        return Profile::AgentBench;
    throw Error(ErrorCode::UnknownProfile,
                fmt::format("unknown profile '{}' (expected dara, dara_icl or agentbench)", text));
}

std::string_view to_string(EventKind kind) noexcept
{
    switch (kind) {
    case EventKind::TaskHeader: return "TaskHeader";
    case EventKind::StepHeader: return "StepHeader";
    case EventKind::Action: return "Action";
    case EventKind::Obs: return "Obs";
    case EventKind::Thought: return "Thought";
    case EventKind::StepSexp: return "StepSexp";
    case EventKind::TaskSexp: return "TaskSexp";
    case EventKind::FinalSexp: return "FinalSexp";
    case EventKind::FinalAnswer: return "FinalAnswer";
    case EventKind::Error: return "Error";
    }
    return "Error";
}

bool TraceEvent::same(const TraceEvent& o) const
{
    return kind == o.kind && task == o.task && step == o.step && action == o.action && name == o.name &&
           text == o.text && expr == o.expr;
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// Cursor over the text while matching one marker.
class Matcher {
public:
    Matcher(std::string_view text, std::size_t pos) : text_(text), pos_(pos) {}

    std::size_t pos() const { return pos_; }

    void spaces()
    {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t'))
            ++pos_;
    }

    bool word(std::string_view w)
    {
        if (pos_ + w.size() > text_.size())
            return false;
        for (std::size_t i = 0; i < w.size(); ++i)
            if (std::tolower(static_cast<unsigned char>(text_[pos_ + i])) != std::tolower(static_cast<unsigned char>(w[i])))
                return false;
        pos_ += w.size();
        return true;
    }

    bool ch(char c)
    {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::optional<int> number()
    {
        const std::size_t start = pos_;
        int value = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) && pos_ - start < 6)
            value = value * 10 + (text_[pos_++] - '0');
        if (pos_ == start)
            return std::nullopt;
        return value;
    }

    // Parses "<n>(.<n>)*" with exactly `count` components.
    std::optional<std::vector<int>> indices(std::size_t count)
    {
        std::vector<int> out;
        for (std::size_t i = 0; i < count; ++i) {
            if (i > 0 && !ch('.'))
                return std::nullopt;
            auto n = number();
            if (!n)
                return std::nullopt;
            out.push_back(*n);
        }
        return out;
    }

    bool colon()
    {
        spaces();
        return ch(':');
    }

private:
    std::string_view text_;
    std::size_t pos_;
};

struct Marker {
    EventKind kind;
    std::size_t start; // offset of the marker
    std::size_t body;  // offset of the body
    std::vector<int> idx;
};

// Markers introduced by '#'. `pos` points at the first '#'.
std::optional<Marker> hash_marker(std::string_view text, std::size_t pos)
{
    Matcher m(text, pos);
    int hashes = 0;
    while (m.ch('#'))
        ++hashes;
    if (hashes > 3)
        return std::nullopt;
    m.spaces();
    auto with = [&](EventKind kind, std::vector<int> idx) -> std::optional<Marker> {
        return Marker{kind, pos, m.pos(), std::move(idx)};
    };
    const std::size_t after_hashes = m.pos();
    auto reset = [&] { m = Matcher(text, after_hashes); };

    if (m.word("Task")) {
        m.spaces();
        if (auto i = m.indices(1); i && m.colon())
            return with(EventKind::TaskHeader, *i);
        return std::nullopt;
    }
    if (m.word("Step")) {
        m.spaces();
        if (auto i = m.indices(2); i && m.colon())
            return with(EventKind::StepHeader, *i);
        return std::nullopt;
    }
    if (m.word("Action")) {
        m.spaces();
        if (auto i = m.indices(3); i && m.colon())
            return with(EventKind::Action, *i);
        return std::nullopt;
    }
    if (m.word("Observation") || (reset(), m.word("Obs"))) {
        m.spaces();
        if (auto i = m.indices(3); i && m.colon())
            return with(EventKind::Obs, *i);
        return std::nullopt;
    }
    reset();
    if (m.word("Thought")) {
        m.spaces();
        if (auto i = m.indices(3); i && m.colon())
            return with(EventKind::Thought, *i);
        return std::nullopt;
    }
    if (m.word("S-exp-")) {
        const auto task = m.number();
        if (!task)
            return std::nullopt;
        std::vector<int> idx{*task};
        if (m.ch('.')) {
            const auto step = m.number();
            if (!step)
                return std::nullopt;
            idx.push_back(*step);
        }
        if (!m.colon())
            return std::nullopt;
        return with(idx.size() == 2 ? EventKind::StepSexp : EventKind::TaskSexp, idx);
    }
    if (m.word("Final")) {
        m.spaces();
        const std::size_t p = m.pos();
        if (m.word("s-exp") && m.colon())
            return with(EventKind::FinalSexp, {});
        m = Matcher(text, p);
        if (m.word("answer") && m.colon())
            return with(EventKind::FinalAnswer, {});
        return std::nullopt;
    }
    if (m.word("Error") && m.colon())
        return with(EventKind::Error, {});
    return std::nullopt;
}

std::vector<Marker> dara_markers(std::string_view text)
{
    std::vector<Marker> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '#' || (i > 0 && text[i - 1] == '#'))
            continue;
        if (auto m = hash_marker(text, i)) {
            out.push_back(*m);
            i = m->body - 1;
        }
    }
    return out;
}

std::vector<Marker> agentbench_markers(std::string_view text)
{
    std::vector<Marker> out;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        std::size_t p = line_start;
        while (p < text.size() && (text[p] == ' ' || text[p] == '\t'))
            ++p;
        std::optional<Marker> found;
        if (p < text.size() && text[p] == '#') {
            found = hash_marker(text, p);
            if (found && found->kind != EventKind::FinalSexp && found->kind != EventKind::Error)
                found.reset();
        } else {
            static const std::pair<std::string_view, EventKind> keys[] = {
                {"Thought", EventKind::Thought},
                {"Action", EventKind::Action},
                {"Observation", EventKind::Obs},
                {"Final Answer", EventKind::FinalAnswer},
            };
            for (const auto& [key, kind] : keys) {
                Matcher m(text, p);
                if (m.word(key) && m.colon()) {
                    found = Marker{kind, p, m.pos(), {}};
                    break;
                }
            }
        }
        if (found)
            out.push_back(*found);
        const auto nl = text.find('\n', line_start);
        if (nl == std::string_view::npos)
            break;
        line_start = nl + 1;
    }
    return out;
}

std::size_t line_of(std::string_view text, std::size_t offset)
{
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

} // namespace

std::vector<MarkerSpan> find_markers(std::string_view text, Profile profile)
{
    std::vector<MarkerSpan> out;
    for (const auto& m : profile == Profile::AgentBench ? agentbench_markers(text) : dara_markers(text))
        out.push_back({m.kind, m.start, m.body});
    return out;
}

std::optional<ActionCall> parse_action_call(std::string_view text)
{
    text = trim(text);
    std::size_t i = 0;
    while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
        ++i;
    if (i == 0 || std::isdigit(static_cast<unsigned char>(text[0])))
        return std::nullopt;
    ActionCall call{std::string(text.substr(0, i)), {}};
    auto rest = trim(text.substr(i));
    if (rest.empty() || rest.front() != '(')
        return std::nullopt;
    while (!rest.empty() && (rest.back() == '.' || std::isspace(static_cast<unsigned char>(rest.back()))))
        rest.remove_suffix(1);
    if (rest.size() < 2 || rest.back() != ')')
        return std::nullopt;
    call.args = std::string(trim(rest.substr(1, rest.size() - 2)));
    return call;
}

ParsedOutput parse_events(std::string_view text, Profile profile)
{
    ParsedOutput out;
    const auto markers = profile == Profile::AgentBench ? agentbench_markers(text) : dara_markers(text);
    if (markers.empty()) {
        out.issues.push_back({1, trim(text).empty() ? "empty output"
                                                    : "no trace marker found (expected Task, Step, Action, "
                                                      "Thought, S-exp or Final markers)"});
        return out;
    }
    int ab_actions = 0;
    for (std::size_t n = 0; n < markers.size(); ++n) {
        const Marker& m = markers[n];
        const std::size_t end = n + 1 < markers.size() ? markers[n + 1].start : text.size();
        const std::string body(trim(text.substr(m.body, end - m.body)));
        TraceEvent e;
        e.kind = m.kind;
        e.line = line_of(text, m.start);
        if (m.idx.size() > 0)
            e.task = m.idx[0];
        if (m.idx.size() > 1)
            e.step = m.idx[1];
        if (m.idx.size() > 2)
            e.action = m.idx[2];
        auto issue = [&](std::string msg) { out.issues.push_back({e.line, std::move(msg)}); };

        switch (m.kind) {
        case EventKind::Action: {
            if (profile == Profile::AgentBench)
                e.action = ++ab_actions;
            if (auto call = parse_action_call(body)) {
                e.name = call->name;
                e.text = call->args;
            } else {
                e.text = body;
                issue(fmt::format("malformed action '{}': expected name(arguments)", body));
            }
            break;
        }
        case EventKind::Obs:
        case EventKind::Thought:
            if (profile == Profile::AgentBench)
                e.action = ab_actions;
            e.text = body;
            break;
        case EventKind::StepSexp:
        case EventKind::TaskSexp:
        case EventKind::FinalSexp:
            e.text = body;
            try {
                e.expr = parse_sexpr(body);
            } catch (const Error& err) {
                issue(fmt::format("invalid s-expression after {} marker: {}", to_string(m.kind), err.what()));
            }
            break;
        case EventKind::FinalAnswer: {
            const auto hash = body.find('#');
            std::size_t k = hash == std::string::npos ? body.size() : hash + 1;
            while (k < body.size() && std::isdigit(static_cast<unsigned char>(body[k])))
                ++k;
            if (hash == std::string::npos || k == hash + 1) {
                e.text = body;
                issue(fmt::format("final answer '{}' does not name a variable (#id)", body));
            } else {
                e.text = body.substr(hash, k - hash);
            }
            break;
        }
        default: e.text = body; break;
        }
        out.events.push_back(std::move(e));
    }
    return out;
}

std::optional<std::string> EventOrder::check(const TraceEvent& e)
{
    if (e.kind == EventKind::Error)
        return std::nullopt;
    if (finished_ && !(e.kind == EventKind::FinalSexp && !final_sexp_seen_ && final_answer_seen_))
        return fmt::format("{} after the final event", to_string(e.kind));
    if (pending_action_ && e.kind != EventKind::Obs)
        return fmt::format("expected an observation for action {}.{}.{} before {}", pending_action_->task,
                           pending_action_->step, pending_action_->action, to_string(e.kind));

    if (profile_ == Profile::AgentBench) {
        switch (e.kind) {
        case EventKind::Action: pending_action_ = e; break;
        case EventKind::Obs:
            if (!pending_action_)
                return std::string("observation without a preceding action");
            pending_action_.reset();
            break;
        case EventKind::FinalAnswer:
            finished_ = true;
            final_answer_seen_ = true;
            break;
        case EventKind::FinalSexp:
            finished_ = true;
            final_sexp_seen_ = true;
            break;
        default: break;
        }
        return std::nullopt;
    }

    auto here = [&] { return e.task == task_ && e.step == step_; };
    switch (e.kind) {
    case EventKind::TaskHeader:
        if (e.task != task_ + 1)
            return fmt::format("expected Task {} but found Task {}", task_ + 1, e.task);
        task_ = e.task;
        step_ = 0;
        action_ = 0;
        break;
    case EventKind::StepHeader:
        if (e.task != task_ || e.step != step_ + 1)
            return fmt::format("expected Step {}.{} but found Step {}.{}", task_, step_ + 1, e.task, e.step);
        step_ = e.step;
        action_ = 0;
        break;
    case EventKind::Action:
        if (!here() || e.action != action_ + 1)
            return fmt::format("expected Action {}.{}.{} but found Action {}.{}.{}", task_, step_, action_ + 1, e.task,
                               e.step, e.action);
        action_ = e.action;
        pending_action_ = e;
        break;
    case EventKind::Obs:
        if (!pending_action_)
            return fmt::format("Obs {}.{}.{} without a preceding action", e.task, e.step, e.action);
        if (e.task != pending_action_->task || e.step != pending_action_->step ||
            e.action != pending_action_->action)
            return fmt::format("expected Obs {}.{}.{} but found Obs {}.{}.{}", pending_action_->task,
                               pending_action_->step, pending_action_->action, e.task, e.step, e.action);
        pending_action_.reset();
        break;
    case EventKind::Thought:
        if (!here() || (e.action != action_ && e.action != action_ + 1))
            return fmt::format("Thought {}.{}.{} is out of order (current action {}.{}.{})", e.task, e.step, e.action,
                               task_, step_, action_);
        break;
    case EventKind::StepSexp:
        if (!here())
            return fmt::format("S-exp-{}.{} does not belong to the current step {}.{}", e.task, e.step, task_, step_);
        break;
    case EventKind::TaskSexp:
        if (e.task != task_)
            return fmt::format("S-exp-{} does not belong to the current task {}", e.task, task_);
        break;
    case EventKind::FinalSexp:
        finished_ = true;
        final_sexp_seen_ = true;
        break;
    case EventKind::FinalAnswer:
        finished_ = true;
        final_answer_seen_ = true;
        break;
    case EventKind::Error: break;
    }
    return std::nullopt;
}

std::vector<GrammarIssue> order_issues(const std::vector<TraceEvent>& events, Profile profile)
{
    std::vector<GrammarIssue> out;
    EventOrder order(profile);
    for (const auto& e : events)
        if (auto problem = order.check(e))
            out.push_back({e.line, *problem});
    return out;
}

std::vector<TraceEvent> parse_agent_output(std::string_view text, Profile profile)
{
    ParsedOutput parsed = parse_events(text, profile);
    auto issues = std::move(parsed.issues);
    auto ordering = order_issues(parsed.events, profile);
    issues.insert(issues.end(), ordering.begin(), ordering.end());
    if (!issues.empty()) {
        const auto first = std::min_element(issues.begin(), issues.end(),
                                            [](const GrammarIssue& a, const GrammarIssue& b) { return a.line < b.line; });
        throw Error(ErrorCode::GrammarError, fmt::format("line {}: {}", first->line, first->message), first->line);
    }
    return std::move(parsed.events);
}

std::string serialize_event(const TraceEvent& e, Profile profile)
{
    const auto sexp = [&] { return e.expr ? print_sexpr(*e.expr) : e.text; };
    if (profile == Profile::AgentBench) {
        switch (e.kind) {
        case EventKind::Thought: return fmt::format("Thought: {}", e.text);
        case EventKind::Action: return fmt::format("Action: {}({})", e.name, e.text);
        case EventKind::Obs: return fmt::format("Observation: {}", e.text);
        case EventKind::FinalAnswer: return fmt::format("Final Answer: {}", e.text);
        default: break;
        }
    }
    switch (e.kind) {
    case EventKind::TaskHeader: return fmt::format("# Task {}: {}", e.task, e.text);
    case EventKind::StepHeader: return fmt::format("## Step {}.{}:", e.task, e.step);
    case EventKind::Action: return fmt::format("### Action {}.{}.{}: {}({})", e.task, e.step, e.action, e.name, e.text);
    case EventKind::Obs:
        return fmt::format("### {} {}.{}.{}: {}", profile == Profile::DaraIcl ? "Observation" : "Obs", e.task, e.step,
                           e.action, e.text);
    case EventKind::Thought: return fmt::format("### Thought {}.{}.{}: {}", e.task, e.step, e.action, e.text);
    case EventKind::StepSexp: return fmt::format("### S-exp-{}.{}: {}", e.task, e.step, sexp());
    case EventKind::TaskSexp: return fmt::format("## S-exp-{}: {}", e.task, sexp());
    case EventKind::FinalSexp: return fmt::format("# Final s-exp:\n{}", sexp());
    case EventKind::FinalAnswer: return fmt::format("# Final answer: {}", e.text);
    case EventKind::Error: return fmt::format("# Error: {}", e.text);
    }
    return {};
}

std::string serialize_events(const std::vector<TraceEvent>& events, Profile profile)
{
    std::string out;
    if (profile != Profile::AgentBench)
        out += "The given question can be decomposed into the following subtasks:\n";
    for (const auto& e : events) {
        out += serialize_event(e, profile);
        out += '\n';
    }
    return out;
}

std::vector<std::string> stop_sequences(Profile profile)
{
    switch (profile) {
    case Profile::Dara: return {"### Obs"};
    case Profile::DaraIcl: return {"### Observation", "### Obs"};
    case Profile::AgentBench: return {"Observation:"};
    }
    return {};
}

} // namespace kgqa
