// SPDX-License-Identifier: Apache-2.0
//
// Fine-tuning data construction: training-pair filtering, decomposition
// prompts for an external annotator, trajectory synthesis and validation,
// and the human review manifest.
#pragma once

#include "kgqa/agent.hpp"
#include "kgqa/decompose.hpp"
#include "kgqa/eval.hpp"
#include "kgqa/graph.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace kgqa {

struct TrainingCandidate {
    DatasetItem item;
    std::size_t subtask_count = 0;
    std::vector<std::string> relations; // sorted multiset
    std::string duplicate_key;          // canonical printed gold form
};

struct FilterPolicy {
    bool require_complex = true;
    std::size_t max_per_relation = 10;
};

struct FilterStats {
    std::size_t duplicates = 0;
    std::size_t simple = 0;
    std::size_t over_cap = 0;
    std::size_t undecomposable = 0;
};

/// Processes items in qid order: drops canonical duplicates (first kept),
/// simple items when require_complex, and items that would push any of their
/// relations past max_per_relation. Items whose gold form does not bind
/// against the schema are dropped and counted as undecomposable.
[[nodiscard]] std::vector<TrainingCandidate> filter_training_pairs(const std::vector<DatasetItem>& items,
                                                                   const FilterPolicy& policy,
                                                                   const SchemaView& schema,
                                                                   FilterStats* stats = nullptr);

/// `Task i: Step1:(...) Step2:(...)` lines; references print as `task<i>`,
/// `step<j>` (same subtask) or `task<i>.step<j>`.
[[nodiscard]] std::string decomposition_lines(const std::vector<Subtask>& subtasks);
/// Inverse of decomposition_lines, with atoms left unbound. Throws ParseError.
[[nodiscard]] std::vector<Subtask> parse_decomposition_lines(std::string_view text);

/// Numbered relation descriptions for every relation used by the subtasks, in
/// first-use order. Throws MissingDescription.
[[nodiscard]] std::string relation_description_block(const std::vector<Subtask>& subtasks, const SchemaView& schema);

/// Throws MissingDescription, or the decomposition errors of decompose_by_ops.
[[nodiscard]] std::string build_decomposition_prompt(const TrainingCandidate& candidate, const SchemaView& schema);

/// Writes `<qid>.prompt.txt` per candidate into `dir`; returns the paths in input order.
std::vector<std::filesystem::path> write_prompt_bundles(const std::filesystem::path& dir,
                                                        const std::vector<TrainingCandidate>& candidates,
                                                        const SchemaView& schema);

struct SynthesisOptions {
    std::size_t topk = 5;
    std::size_t deep_read_n = 2;
};

/// A dara-profile trajectory that grounds every step of the gold
/// decomposition with real action observations. The gold relation and the
/// top-ranked distractors (deep_read_n in total) go through get_descriptions.
[[nodiscard]] std::string synthesize_trajectory(const DatasetItem& item, const KnowledgeGraph& graph,
                                                const SynthesisOptions& options = {});

enum class Check { Grammar, Ordering, Grounding, Answer, ActionArgs };
std::string_view to_string(Check check) noexcept;

struct Finding {
    std::size_t line = 0;
    std::string message;
};

struct CheckResult {
    Check check = Check::Grammar;
    std::vector<Finding> findings;

    [[nodiscard]] bool passed() const noexcept { return findings.empty(); }
};

struct ValidationReport {
    std::string qid;
    std::vector<CheckResult> checks; // grammar, ordering, grounding, answer, action_args

    [[nodiscard]] bool passed() const;
    [[nodiscard]] const CheckResult& result(Check check) const;
    [[nodiscard]] std::vector<Check> failed() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Runs the five checks. Never throws for trace content.
[[nodiscard]] ValidationReport validate_trajectory(std::string_view trace_text, const DatasetItem& item,
                                                   const KnowledgeGraph& graph, Profile profile = Profile::Dara);

/// Review layout: `<dir>/manifest.json` plus `<dir>/<qid>/trajectory.txt` and
/// `<dir>/<qid>/checklist.md` per entry.
struct ReviewEntry {
    std::string trace_text;
    ValidationReport report;
};
void write_review_manifest(const std::filesystem::path& dir, const std::vector<ReviewEntry>& entries);

} // namespace kgqa
