// SPDX-License-Identifier: Apache-2.0
#include "kgqa/pipeline.hpp"

#include "kgqa/action_space.hpp"
#include "kgqa/error.hpp"
#include "kgqa/schema.hpp"

#include "kgqa_prompts.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

namespace kgqa {

using nlohmann::json;

namespace {

// Replaces the refs found in `steps`, recursively, and leaves the others.
Expr splice_steps(const Expr& e, const RefBindings& steps)
{
    if (e.op == Op::Ref) {
        const auto it = steps.find(e.name);
        return it == steps.end() ? e : splice_steps(it->second, steps);
    }
    Expr out = e;
    for (auto& a : out.args)
        a = splice_steps(a, steps);
    return out;
}

std::string strip_period(std::string_view s)
{
    while (!s.empty() && (s.back() == '.' || s.back() == ' '))
        s.remove_suffix(1);
    return std::string(s);
}

std::string trim_copy(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return std::string(s);
}

void write_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
    out << text;
}

} // namespace

std::vector<TrainingCandidate> filter_training_pairs(const std::vector<DatasetItem>& items, const FilterPolicy& policy,
                                                     const SchemaView& schema, FilterStats* stats)
{
    FilterStats local;
    FilterStats& st = stats ? *stats : local;
    std::vector<const DatasetItem*> ordered;
    for (const auto& item : items)
        ordered.push_back(&item);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const DatasetItem* a, const DatasetItem* b) { return a->qid < b->qid; });

    std::set<std::string> keys;
    std::map<std::string, std::size_t> per_relation;
    std::vector<TrainingCandidate> out;
    for (const DatasetItem* item : ordered) {
        TrainingCandidate c;
        try {
            const Expr bound = bind(item->gold, schema);
            c.duplicate_key = print_sexpr(canonicalize(bound));
            c.subtask_count = decompose_by_ops(bound, schema).size();
            c.relations = schema_items(bound).relations;
        } catch (const Error&) {
            ++st.undecomposable;
            continue;
        }
        if (keys.contains(c.duplicate_key)) {
            ++st.duplicates;
            continue;
        }
        if (policy.require_complex && c.subtask_count < 2) {
            ++st.simple;
            continue;
        }
        std::sort(c.relations.begin(), c.relations.end());
        std::vector<std::string> distinct = c.relations;
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (std::any_of(distinct.begin(), distinct.end(),
                        [&](const std::string& r) { return per_relation[r] >= policy.max_per_relation; })) {
            ++st.over_cap;
            continue;
        }
        for (const auto& r : distinct)
            ++per_relation[r];
        keys.insert(c.duplicate_key);
        c.item = *item;
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

Expr rename_refs(const Expr& e, int task)
{
    if (e.op == Op::Ref) {
        const auto id = RefId::parse(e.name);
        if (!id)
            return Expr::symbol(e.name);
        if (!id->step)
            return Expr::symbol(fmt::format("task{}", id->task));
        if (id->task == task)
            return Expr::symbol(fmt::format("step{}", *id->step));
        return Expr::symbol(fmt::format("task{}.step{}", id->task, *id->step));
    }
    Expr out = e;
    for (auto& a : out.args)
        a = rename_refs(a, task);
    return out;
}

std::optional<int> numbered(std::string_view name, std::string_view prefix)
{
    if (name.size() <= prefix.size() || name.substr(0, prefix.size()) != prefix)
        return std::nullopt;
    int n = 0;
    for (char c : name.substr(prefix.size())) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            return std::nullopt;
        n = n * 10 + (c - '0');
    }
    return n;
}

Expr restore_refs(const Expr& e, int task)
{
    if (e.op == Op::Symbol) {
        if (auto t = numbered(e.name, "task"))
            return Expr::ref(RefId{*t, std::nullopt}.str());
        if (auto s = numbered(e.name, "step"))
            return Expr::ref(RefId{task, *s}.str());
        const auto dot = e.name.find(".step");
        if (dot != std::string::npos) {
            auto t = numbered(e.name.substr(0, dot), "task");
            auto s = numbered(e.name.substr(dot + 1), "step");
            if (t && s)
                return Expr::ref(RefId{*t, *s}.str());
        }
        return e;
    }
    Expr out = e;
    for (auto& a : out.args)
        a = restore_refs(a, task);
    return out;
}

} // namespace

std::string decomposition_lines(const std::vector<Subtask>& subtasks)
{
    std::string out;
    for (const auto& t : subtasks) {
        out += fmt::format("Task {}:", t.index);
        for (std::size_t j = 0; j < t.steps.size(); ++j)
            out += fmt::format(" Step{}:{}", j + 1, print_sexpr(rename_refs(t.steps[j], t.index)));
        out += '\n';
    }
    return out;
}

std::vector<Subtask> parse_decomposition_lines(std::string_view text)
{
    std::vector<Subtask> out;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        const std::string l = trim_copy(line);
        if (l.empty())
            continue;
        const auto fail = [&](std::string_view why) {
            throw Error(ErrorCode::ParseError, fmt::format("line {}: {}", lineno, why), lineno);
        };
        const auto colon = l.find(':');
        const auto index = colon == std::string::npos ? std::nullopt : numbered(trim_copy(l.substr(0, colon)), "Task ");
        if (!index)
            fail("expected 'Task <i>:'");
        if (*index != static_cast<int>(out.size()) + 1)
            fail(fmt::format("expected 'Task {}:'", out.size() + 1));
        Subtask t;
        t.index = *index;
        std::size_t p = colon + 1;
        int expected = 1;
        while (true) {
            while (p < l.size() && l[p] == ' ')
                ++p;
            if (p >= l.size())
                break;
            const std::string marker = fmt::format("Step{}:", expected);
            if (l.compare(p, marker.size(), marker) != 0)
                fail(fmt::format("expected '{}'", marker));
            p += marker.size();
            // The body runs to the next top-level "Step<n>:" marker.
            int depth = 0;
            std::size_t q = p;
            for (; q < l.size(); ++q) {
                if (l[q] == '(')
                    ++depth;
                else if (l[q] == ')')
                    --depth;
                else if (depth == 0 && l[q] == ' ' && l.compare(q + 1, 4, "Step") == 0)
                    break;
            }
            try {
                t.steps.push_back(restore_refs(parse_sexpr(l.substr(p, q - p)), t.index));
            } catch (const Error& e) {
                fail(e.what());
            }
            ++expected;
            p = q;
        }
        if (t.steps.empty())
            fail("subtask without steps");
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

struct RelationUse {
    std::string name;
    RelationDirection direction;
};

class RelationCollector {
public:
    std::vector<RelationUse> uses;

    void unary(const Expr& e)
    {
        switch (e.op) {
        case Op::Join:
            binary(e.args[0], RelationDirection::Incoming);
            unary(e.args[1]);
            break;
        case Op::ArgMax:
        case Op::ArgMin:
            unary(e.args[0]);
            binary(e.args[1], RelationDirection::Outgoing);
            break;
        case Op::Lt:
        case Op::Le:
        case Op::Gt:
        case Op::Ge: binary(e.args[0], RelationDirection::Outgoing); break;
        case Op::And:
        case Op::Count:
            for (const auto& a : e.args)
                unary(a);
            break;
        default: break;
        }
    }

private:
    void add(const std::string& name, RelationDirection d)
    {
        for (const auto& u : uses)
            if (u.name == name && u.direction == d)
                return;
        uses.push_back({name, d});
    }

    void binary(const Expr& e, RelationDirection d)
    {
        const auto flip = d == RelationDirection::Incoming ? RelationDirection::Outgoing : RelationDirection::Incoming;
        if (e.op == Op::Relation || e.op == Op::Symbol)
            add(e.name, d);
        else if (e.op == Op::Reverse)
            binary(e.args[0], flip);
        else if (e.op == Op::Join)
            for (const auto& a : e.args)
                binary(a, d);
    }
};

std::string describe_use(std::size_t n, const RelationUse& use, const SchemaView& schema)
{
    const RelationInfo* rel = schema.relation(use.name);
    if (!rel || rel->description.empty())
        throw Error(ErrorCode::MissingDescription, fmt::format("no description for relation '{}'", use.name));
    const bool out = use.direction == RelationDirection::Outgoing;
    const std::string end = out ? rel->range : rel->domain;
    std::string text = fmt::format("{}. the {} relation '{}', which describes {}.", n, out ? "outgoing" : "incoming",
                                   use.name, strip_period(rel->description));
    if (!end.empty()) {
        text += fmt::format(" The type of its {} entity is '{}'", out ? "tail" : "head", end);
        const ClassInfo* c = schema.klass(end);
        if (c && !c->description.empty())
            text += fmt::format(" ({})", c->description);
        text += '.';
    }
    return text;
}

std::string fill(std::string_view tmpl, const std::vector<std::pair<std::string_view, std::string>>& vars)
{
    std::string out(tmpl);
    while (!out.empty() && out.back() == '\n')
        out.pop_back();
    for (const auto& [key, value] : vars) {
        const std::string needle = fmt::format("{{{}}}", key);
        for (auto pos = out.find(needle); pos != std::string::npos; pos = out.find(needle, pos + value.size()))
            out.replace(pos, needle.size(), value);
    }
    return out;
}

} // namespace

std::string relation_description_block(const std::vector<Subtask>& subtasks, const SchemaView& schema)
{
    RelationCollector collector;
    for (const auto& t : subtasks)
        for (const auto& s : t.steps)
            collector.unary(s);
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < collector.uses.size(); ++i)
        parts.push_back(describe_use(i + 1, collector.uses[i], schema));
    return fmt::format("{}", fmt::join(parts, " "));
}

std::string build_decomposition_prompt(const TrainingCandidate& candidate, const SchemaView& schema)
{
    const auto subtasks = decompose_by_ops(bind(candidate.item.gold, schema), schema);
    std::string lines = decomposition_lines(subtasks);
    if (!lines.empty())
        lines.pop_back();
    std::string question = candidate.item.question;
    const std::string entities = entity_sentence(candidate.item.entities);
    if (!entities.empty())
        question += " " + entities;
    return fill(prompts::decomposition_v1, {{"question", question},
                                            {"subtasks", lines},
                                            {"description", relation_description_block(subtasks, schema)}}) +
           "\n";
}

std::vector<std::filesystem::path> write_prompt_bundles(const std::filesystem::path& dir,
                                                        const std::vector<TrainingCandidate>& candidates,
                                                        const SchemaView& schema)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> out;
    for (const auto& c : candidates) {
        const auto path = dir / (c.item.qid + ".prompt.txt");
        write_file(path, build_decomposition_prompt(c, schema));
        out.push_back(path);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory synthesis

namespace {

std::string direction_name(RelationDirection d) { return d == RelationDirection::Outgoing ? "outgoing" : "incoming"; }

std::string count_word(std::size_t n)
{
    static const char* words[] = {"zero", "one", "two", "three", "four", "five"};
    return n < std::size(words) ? words[n] : std::to_string(n);
}

class Synthesizer {
public:
    Synthesizer(const DatasetItem& item, const KnowledgeGraph& graph, const SynthesisOptions& options)
        : item_(item), graph_(graph), options_(options), env_(graph, Retriever{}, options.topk)
    {
        env_.set_question(item.question);
    }

    std::string run()
    {
        const Expr gold = bind(item_.gold, graph_.schema());
        const auto subtasks = decompose_by_ops(gold, graph_.schema());
        for (const auto& t : subtasks) {
            TraceEvent header;
            header.kind = EventKind::TaskHeader;
            header.task = t.index;
            header.text = t.description ? *t.description
                          : subtasks.size() == 1
                              ? fmt::format("Answer the question: {}", item_.question)
                              : fmt::format("Solve subtask {} of {} toward answering: {}", t.index, subtasks.size(),
                                            item_.question);
            env_.set_task(header.text);
            events_.push_back(std::move(header));
            for (std::size_t j = 0; j < t.steps.size(); ++j)
                step(t.index, static_cast<int>(j) + 1, t.steps[j]);
            // Task forms refer to earlier tasks only, so this task's steps are spliced in.
            RefBindings steps;
            for (std::size_t j = 0; j < t.steps.size(); ++j)
                steps[RefId{t.index, static_cast<int>(j) + 1}.str()] = t.steps[j];
            const Expr whole = splice_steps(t.steps.back(), steps);
            TraceEvent task_sexp;
            task_sexp.kind = EventKind::TaskSexp;
            task_sexp.task = t.index;
            task_sexp.expr = whole;
            task_sexp.text = print_sexpr(whole);
            env_.bind_ref(RefId{t.index, std::nullopt}.str(), whole);
            events_.push_back(std::move(task_sexp));
        }
        TraceEvent final_event;
        final_event.kind = EventKind::FinalSexp;
        final_event.expr = reassemble(subtasks);
        final_event.text = print_sexpr(*final_event.expr);
        events_.push_back(std::move(final_event));
        return serialize_events(events_, Profile::Dara);
    }

private:
    const DatasetItem& item_;
    const KnowledgeGraph& graph_;
    SynthesisOptions options_;
    ActionEnvironment env_;
    std::vector<TraceEvent> events_;
    int task_ = 0;
    int step_ = 0;
    int action_ = 0;

    Observation act(const std::string& name, const std::string& args)
    {
        ++action_;
        TraceEvent a;
        a.kind = EventKind::Action;
        a.task = task_;
        a.step = step_;
        a.action = action_;
        a.name = name;
        a.text = args;
        events_.push_back(a);
        Observation obs;
        try {
            obs = env_.execute(name, args);
        } catch (const Error& e) {
            obs.text = render_action_error(e);
        }
        TraceEvent o;
        o.kind = EventKind::Obs;
        o.task = task_;
        o.step = step_;
        o.action = action_;
        o.text = obs.text;
        events_.push_back(std::move(o));
        return obs;
    }

    void thought(std::string text)
    {
        TraceEvent t;
        t.kind = EventKind::Thought;
        t.task = task_;
        t.step = step_;
        t.action = action_;
        t.text = std::move(text);
        events_.push_back(std::move(t));
    }

    // Skim a relation list, then deep-read the gold relation with the best distractors.
    void choose_relation(const std::string& subject, const RelationUse& gold, std::string_view op)
    {
        std::vector<RelationUse> listed;
        if (subject.empty()) {
            const Observation obs = act("get_relevant_relations", env_.task_text());
            for (const auto& n : obs.names)
                listed.push_back({n, gold.direction});
        } else {
            const Observation obs = act("get_relations", subject);
            for (const auto& n : obs.outgoing)
                listed.push_back({n, RelationDirection::Outgoing});
            for (const auto& n : obs.incoming)
                listed.push_back({n, RelationDirection::Incoming});
            const bool found = std::any_of(listed.begin(), listed.end(), [&](const RelationUse& u) {
                return u.name == gold.name && u.direction == gold.direction;
            });
            if (!found) {
                thought(fmt::format("None of the listed relations fits Task {}. I need to retrieve relevant relations.",
                                    task_));
                listed.clear();
                const Observation rel = act("get_relevant_relations", env_.task_text());
                for (const auto& n : rel.names)
                    listed.push_back({n, gold.direction});
            }
        }
        std::vector<RelationUse> picked;
        for (const auto& u : listed)
            if (picked.size() + 1 < options_.deep_read_n && u.name != gold.name)
                picked.push_back(u);
        // The gold relation keeps its rank position among the picked ones.
        auto pos = std::find_if(listed.begin(), listed.end(), [&](const RelationUse& u) { return u.name == gold.name; });
        std::size_t rank = 0;
        for (const auto& p : picked) {
            auto it = std::find_if(listed.begin(), listed.end(), [&](const RelationUse& u) { return u.name == p.name; });
            if (pos != listed.end() && it < pos)
                ++rank;
        }
        picked.insert(picked.begin() + static_cast<std::ptrdiff_t>(pos == listed.end() ? 0 : rank), gold);

        std::vector<std::string> shown;
        std::vector<std::string> request;
        for (const auto& p : picked) {
            shown.push_back(fmt::format("{} ({})", p.name, direction_name(p.direction)));
            request.push_back(shown.back());
        }
        if (picked.size() > 1) {
            thought(fmt::format("From the above relations, {} are the {} most likely relations to finish Task {}. To "
                                "select the correct one, I need to check their underlying meaning.",
                                fmt::join(shown, ", "), count_word(picked.size()), task_));
        } else {
            thought(fmt::format("From the above relations, {} is the most likely relation to finish Task {}. I need "
                                "to check its underlying meaning.",
                                shown.front(), task_));
        }
        act("get_descriptions", fmt::format("{}", fmt::join(request, ", ")));
        thought(fmt::format("From the explanations, use the {} relation '{}' with the operator {}.",
                            direction_name(gold.direction), gold.name, op));
    }

    static std::optional<RelationUse> relation_of(const Expr& e, RelationDirection base)
    {
        if (e.op == Op::Relation)
            return RelationUse{e.name, base};
        if (e.op == Op::Reverse && e.args[0].op == Op::Relation)
            return RelationUse{e.args[0].name, base == RelationDirection::Incoming ? RelationDirection::Outgoing
                                                                                    : RelationDirection::Incoming};
        return std::nullopt;
    }

    static std::string subject_of(const Expr& e)
    {
        if (e.op == Op::Entity || e.op == Op::Ref)
            return e.name;
        return {};
    }

    void step(int task, int step_index, const Expr& s)
    {
        task_ = task;
        step_ = step_index;
        action_ = 0;
        TraceEvent header;
        header.kind = EventKind::StepHeader;
        header.task = task;
        header.step = step_index;
        events_.push_back(std::move(header));

        switch (s.op) {
        case Op::Join:
            if (auto rel = relation_of(s.args[0], RelationDirection::Incoming))
                choose_relation(subject_of(s.args[1]), *rel, "JOIN");
            else
                thought("Chain the relations with the operator JOIN.");
            break;
        case Op::ArgMax:
        case Op::ArgMin:
            if (auto rel = relation_of(s.args[1], RelationDirection::Outgoing))
                choose_relation(subject_of(s.args[0]), *rel, std::string(op_name(s.op)));
            else
                thought(fmt::format("Rank the entities with the operator {}.", op_name(s.op)));
            break;
        case Op::Lt:
        case Op::Le:
        case Op::Gt:
        case Op::Ge:
            if (auto rel = relation_of(s.args[0], RelationDirection::Outgoing))
                choose_relation({}, *rel, std::string(op_name(s.op)));
            break;
        case Op::And: {
            const int class_side = s.args[0].op == Op::Class ? 0 : (s.args[1].op == Op::Class ? 1 : -1);
            if (class_side >= 0) {
                const std::string subject = subject_of(s.args[class_side == 0 ? 1 : 0]);
                if (!subject.empty())
                    act("get_classes", subject);
                else
                    act("get_relevant_classes", env_.task_text());
                thought(fmt::format("Use the class '{}' with the operator AND to keep only its instances.",
                                    s.args[class_side].name));
            } else {
                thought("Use the operator AND to get the common entities of both parts.");
            }
            break;
        }
        case Op::Count: thought("Use the operator COUNT to count the entities."); break;
        default: break;
        }

        TraceEvent sexp;
        sexp.kind = EventKind::StepSexp;
        sexp.task = task;
        sexp.step = step_index;
        sexp.expr = s;
        sexp.text = print_sexpr(s);
        env_.bind_ref(RefId{task, step_index}.str(), s);
        events_.push_back(std::move(sexp));
    }
};

} // namespace

std::string synthesize_trajectory(const DatasetItem& item, const KnowledgeGraph& graph, const SynthesisOptions& options)
{
    return Synthesizer(item, graph, options).run();
}

// ---------------------------------------------------------------------------
// Validation

std::string_view to_string(Check check) noexcept
{
    switch (check) {
    case Check::Grammar: return "grammar";
    case Check::Ordering: return "ordering";
    case Check::Grounding: return "grounding";
    case Check::Answer: return "answer";
    case Check::ActionArgs: return "action_args";
    }
    return "grammar";
}

bool ValidationReport::passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
}

const CheckResult& ValidationReport::result(Check check) const
{
    for (const auto& c : checks)
        if (c.check == check)
            return c;
    throw Error(ErrorCode::InvalidArgument, fmt::format("report has no '{}' check", to_string(check)));
}

std::vector<Check> ValidationReport::failed() const
{
    std::vector<Check> out;
    for (const auto& c : checks)
        if (!c.passed())
            out.push_back(c.check);
    return out;
}

json ValidationReport::to_json() const
{
    json checks_doc = json::array();
    for (const auto& c : checks) {
        json findings = json::array();
        for (const auto& f : c.findings)
            findings.push_back({{"line", f.line}, {"message", f.message}});
        checks_doc.push_back({{"check", std::string(kgqa::to_string(c.check))},
                              {"passed", c.passed()},
                              {"findings", std::move(findings)}});
    }
    return {{"qid", qid}, {"passed", passed()}, {"checks", std::move(checks_doc)}};
}

namespace {

bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_'; }

bool mentions(std::string_view text, std::string_view name)
{
    for (auto pos = text.find(name); pos != std::string_view::npos; pos = text.find(name, pos + 1)) {
        const bool left = pos == 0 || !name_char(text[pos - 1]);
        const std::size_t end = pos + name.size();
        // A trailing '.' ends a sentence rather than continuing the name.
        const bool right = end == text.size() || !name_char(text[end]) ||
                           (text[end] == '.' && (end + 1 == text.size() || !name_char(text[end + 1])));
        if (left && right)
            return true;
    }
    return false;
}

struct Arity {
    std::size_t min;
    std::size_t max;
};

std::optional<Arity> action_arity(std::string_view name)
{
    static const std::map<std::string, Arity, std::less<>> table = {
        {"get_relations", {1, 1}},  {"get_classes", {1, 1}},   {"get_neighbors", {2, 2}}, {"intersection", {2, 2}},
        {"get_attributes", {1, 1}}, {"argmax", {2, 2}},        {"argmin", {2, 2}},        {"count", {1, 1}},
        {"lt", {2, 2}},             {"le", {2, 2}},            {"gt", {2, 2}},            {"ge", {2, 2}},
        {"get_descriptions", {1, 1000}},
    };
    const auto it = table.find(name);
    if (it == table.end())
        return std::nullopt;
    return it->second;
}

std::optional<std::string> action_problem(const TraceEvent& a, Profile profile)
{
    const auto& allowed = profile_actions(profile);
    if (std::find(allowed.begin(), allowed.end(), a.name) == allowed.end())
        return fmt::format("'{}' is not an action of the {} profile", a.name, to_string(profile));
    if (a.name.rfind("get_relevant_", 0) == 0) {
        if (trim_copy(a.text).empty())
            return fmt::format("{} needs a task description", a.name);
        return std::nullopt;
    }
    const auto parts = split_args(a.text);
    const auto arity = action_arity(a.name);
    if (arity && (parts.size() < arity->min || parts.size() > arity->max))
        return fmt::format("{} takes {} argument{}, got {}", a.name, arity->min, arity->min == 1 ? "" : "s",
                           parts.size());
    for (const auto& p : parts) {
        const std::string arg = trim_copy(p);
        if (arg.empty())
            return fmt::format("{} has an empty argument", a.name);
        try {
            if (a.name == "get_descriptions")
                (void)parse_description_request(arg);
            else if (arg.front() == '(')
                (void)parse_sexpr(arg);
        } catch (const Error& e) {
            return fmt::format("{}: {}", a.name, e.what());
        }
    }
    return std::nullopt;
}

// Relation arguments of numbered-variable actions.
std::vector<std::string> relation_args(const TraceEvent& a)
{
    const auto parts = split_args(a.text);
    if ((a.name == "get_neighbors" || a.name == "argmax" || a.name == "argmin") && parts.size() == 2)
        return {trim_copy(parts[1])};
    if ((a.name == "lt" || a.name == "le" || a.name == "gt" || a.name == "ge") && parts.size() == 2)
        return {trim_copy(parts[0])};
    return {};
}

std::optional<Expr> replayed_answer(const std::vector<TraceEvent>& events, const TraceEvent& answer,
                                    const KnowledgeGraph& graph, Profile profile, std::string& why)
{
    ActionEnvironment env(graph, Retriever{});
    env.set_allowed_actions(profile_actions(profile));
    env.set_flat_relations(true);
    for (const auto& e : events) {
        if (e.kind == EventKind::TaskHeader)
            env.set_task(e.text);
        if (e.kind != EventKind::Action)
            continue;
        try {
            (void)env.execute(e.name, e.text);
        } catch (const Error&) {
        }
    }
    try {
        return env.variable(answer.text).expr;
    } catch (const Error& e) {
        why = e.what();
        return std::nullopt;
    }
}

} // namespace

ValidationReport validate_trajectory(std::string_view trace_text, const DatasetItem& item, const KnowledgeGraph& graph,
                                     Profile profile)
{
    ValidationReport report;
    report.qid = item.qid;
    for (Check c : {Check::Grammar, Check::Ordering, Check::Grounding, Check::Answer, Check::ActionArgs})
        report.checks.push_back({c, {}});
    auto& grammar = report.checks[0].findings;
    auto& ordering = report.checks[1].findings;
    auto& grounding = report.checks[2].findings;
    auto& answer = report.checks[3].findings;
    auto& args = report.checks[4].findings;

    const ParsedOutput parsed = parse_events(trace_text, profile);
    for (const auto& issue : parsed.issues)
        grammar.push_back({issue.line, issue.message});
    if (parsed.events.empty())
        grammar.push_back({0, "no trace markers found"});
    for (const auto& issue : order_issues(parsed.events, profile))
        ordering.push_back({issue.line, issue.message});

    std::vector<std::string> observed;
    RefBindings bindings;
    const TraceEvent* final_event = nullptr;
    const TraceEvent* final_answer = nullptr;
    const auto grounded = [&](const std::string& relation) {
        return std::any_of(observed.begin(), observed.end(), [&](const std::string& o) { return mentions(o, relation); });
    };
    for (const auto& e : parsed.events) {
        switch (e.kind) {
        case EventKind::Obs: observed.push_back(e.text); break;
        case EventKind::Action:
            if (auto problem = action_problem(e, profile))
                args.push_back({e.line, *problem});
            for (const auto& r : relation_args(e))
                if (!grounded(r))
                    grounding.push_back({e.line, fmt::format("relation '{}' was never observed", r)});
            break;
        case EventKind::StepSexp:
            if (e.expr) {
                for (const auto& r : schema_items(*e.expr).relations)
                    if (!grounded(r))
                        grounding.push_back({e.line, fmt::format("relation '{}' was never observed", r)});
                bindings.insert_or_assign(RefId{e.task, e.step}.str(), *e.expr);
            }
            break;
        case EventKind::TaskSexp:
            if (e.expr)
                bindings.insert_or_assign(RefId{e.task, std::nullopt}.str(), *e.expr);
            break;
        case EventKind::FinalSexp:
            if (!final_event)
                final_event = &e;
            break;
        case EventKind::FinalAnswer:
            if (!final_answer)
                final_answer = &e;
            break;
        default: break;
        }
    }

    std::optional<Expr> final_expr;
    std::size_t final_line = 0;
    if (final_event) {
        final_line = final_event->line;
        if (!final_event->expr) {
            answer.push_back({final_line, "final s-expression does not parse"});
        } else {
            try {
                final_expr = substitute_refs(*final_event->expr, bindings);
            } catch (const Error& e) {
                answer.push_back({final_line, e.what()});
            }
        }
    } else if (final_answer) {
        final_line = final_answer->line;
        std::string why;
        final_expr = replayed_answer(parsed.events, *final_answer, graph, profile, why);
        if (!final_expr)
            answer.push_back({final_line, why});
    } else {
        answer.push_back({0, "trace has no final s-expression or final answer"});
    }
    if (final_expr && !semantic_equal(*final_expr, item.gold)) {
        try {
            const EntitySet got = evaluate(*final_expr, graph).answers();
            const EntitySet want = item.answers ? *item.answers : evaluate(item.gold, graph).answers();
            if (got != want)
                answer.push_back({final_line, fmt::format("final form {} answers differently from the gold form",
                                                          print_sexpr(*final_expr))});
        } catch (const Error& e) {
            answer.push_back({final_line, fmt::format("final form does not evaluate: {}", e.what())});
        }
    }
    return report;
}

void write_review_manifest(const std::filesystem::path& dir, const std::vector<ReviewEntry>& entries)
{
    std::filesystem::create_directories(dir);
    json items = json::array();
    for (const auto& entry : entries) {
        const auto& r = entry.report;
        const auto item_dir = dir / r.qid;
        std::filesystem::create_directories(item_dir);
        write_file(item_dir / "trajectory.txt", entry.trace_text);
        std::string checklist = fmt::format("# {}\n\nAutomated checks:\n\n", r.qid);
        for (const auto& c : r.checks) {
            checklist += fmt::format("- [{}] {}\n", c.passed() ? "x" : " ", to_string(c.check));
            for (const auto& f : c.findings)
                checklist += fmt::format("  - line {}: {}\n", f.line, f.message);
        }
        checklist += "\nReviewer:\n\n"
                     "- [ ] task descriptions match the intent of each step\n"
                     "- [ ] thoughts justify the chosen schema items\n"
                     "- [ ] subtask and step boundaries are not confused\n"
                     "- [ ] accepted as training data\n";
        write_file(item_dir / "checklist.md", checklist);
        json failed = json::array();
        for (Check c : r.failed())
            failed.push_back(std::string(to_string(c)));
        items.push_back({{"qid", r.qid},
                         {"trajectory", (std::filesystem::path(r.qid) / "trajectory.txt").generic_string()},
                         {"checklist", (std::filesystem::path(r.qid) / "checklist.md").generic_string()},
                         {"passed", r.passed()},
                         {"failed_checks", std::move(failed)}});
    }
    write_file(dir / "manifest.json", json{{"items", std::move(items)}}.dump(2) + "\n");
}

} // namespace kgqa
