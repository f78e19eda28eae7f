// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <kgqa/error.hpp>
#include <kgqa/pipeline.hpp>
#include <kgqa/schema.hpp>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <iostream>
#include <map>

namespace kgqa::cli {

using nlohmann::json;

namespace {

struct DataArgs {
    std::optional<fs::path> dataset;
    std::optional<fs::path> out;
    std::optional<fs::path> traces;
    bool allow_simple = false;
    std::size_t max_per_relation = 10;
};

std::vector<DatasetItem> need_dataset(const DataArgs& a)
{
    if (!a.dataset)
        config_error("--dataset is required");
    if (!a.out)
        config_error("--out is required");
    return load_dataset(*a.dataset);
}

void run_filter(const Settings& s, const DataArgs& a)
{
    const auto items = need_dataset(a);
    const SchemaView schema = require_schema(s);
    FilterPolicy policy;
    policy.require_complex = !a.allow_simple;
    policy.max_per_relation = a.max_per_relation;
    FilterStats stats;
    const auto kept = filter_training_pairs(items, policy, schema, &stats);
    std::string out;
    for (const auto& c : kept) {
        json doc = to_json(c.item);
        doc["subtask_count"] = c.subtask_count;
        doc["relations"] = c.relations;
        doc["duplicate_key"] = c.duplicate_key;
        out += doc.dump() + "\n";
    }
    write_text(*a.out, out);
    std::cout << fmt::format("kept {} of {} item(s); dropped {} duplicate, {} simple, {} over the relation cap, {} "
                             "undecomposable\n",
                             kept.size(), items.size(), stats.duplicates, stats.simple, stats.over_cap,
                             stats.undecomposable);
}

void run_prompts(const Settings& s, const DataArgs& a)
{
    const auto items = need_dataset(a);
    const SchemaView schema = require_schema(s);
    std::size_t written = 0;
    fs::create_directories(*a.out);
    for (const auto& item : items) {
        TrainingCandidate c;
        c.item = item;
        try {
            write_text(*a.out / (item.qid + ".prompt.txt"), build_decomposition_prompt(c, schema));
            ++written;
        } catch (const Error& e) {
            std::cerr << fmt::format("warning: {}: {}\n", item.qid, e.what());
        }
    }
    std::cout << fmt::format("wrote {} prompt file(s) to {}\n", written, a.out->string());
}

void run_validate(const Settings& s, const DataArgs& a)
{
    const auto items = need_dataset(a);
    if (!a.traces)
        config_error("--traces is required");
    const KnowledgeGraph graph = require_graph(s);
    std::vector<ReviewEntry> entries;
    std::map<std::string, std::size_t> failures;
    json reports = json::array();
    std::size_t failed_checks = 0;
    for (const auto& item : items) {
        const fs::path path = *a.traces / (item.qid + ".trace.txt");
        if (!fs::exists(path))
            continue;
        ReviewEntry entry;
        entry.trace_text = read_text(path);
        entry.report = validate_trajectory(entry.trace_text, item, graph, s.agent.profile);
        for (Check c : entry.report.failed()) {
            ++failures[std::string(to_string(c))];
            ++failed_checks;
        }
        reports.push_back(entry.report.to_json());
        entries.push_back(std::move(entry));
    }
    fs::create_directories(*a.out);
    write_text(*a.out / "validation.json",
               json{{"trajectories", entries.size()}, {"failed_checks", failed_checks}, {"by_check", failures},
                    {"reports", reports}}
                       .dump(2) +
                   "\n");
    write_review_manifest(*a.out / "review", entries);
    std::size_t passed = 0;
    for (const auto& e : entries)
        passed += e.report.passed() ? 1 : 0;
    std::cout << fmt::format("validated {} trajectories: {} passed, {} failed checks\n", entries.size(), passed,
                             failed_checks);
    for (const auto& e : entries)
        if (!e.report.passed()) {
            std::vector<std::string> names;
            for (Check c : e.report.failed())
                names.emplace_back(to_string(c));
            std::cout << fmt::format("  {}: {}\n", e.report.qid, fmt::join(names, ", "));
        }
}

void run_synthesize(const Settings& s, const DataArgs& a)
{
    const auto items = need_dataset(a);
    const KnowledgeGraph graph = require_graph(s);
    SynthesisOptions options;
    options.topk = s.agent.topk;
    options.deep_read_n = s.agent.deep_read_n;
    std::size_t written = 0;
    for (const auto& item : items) {
        try {
            write_text(*a.out / (item.qid + ".trace.txt"), synthesize_trajectory(item, graph, options));
            ++written;
        } catch (const Error& e) {
            std::cerr << fmt::format("warning: {}: {}\n", item.qid, e.what());
        }
    }
    std::cout << fmt::format("wrote {} trajectories to {}\n", written, a.out->string());
}

} // namespace

void register_data(CLI::App& app, Overrides& o)
{
    auto* data = app.add_subcommand("data", "Build fine-tuning artifacts");
    data->require_subcommand(1);
    auto args = std::make_shared<DataArgs>();
    const auto common = [&](CLI::App* cmd) {
        add_common_options(*cmd, o);
        add_kg_options(*cmd, o);
        cmd->add_option("--dataset", args->dataset, "Dataset file (one JSON record per line)");
    };

    auto* filter = data->add_subcommand("filter", "Deduplicate and select training pairs");
    common(filter);
    filter->add_option("--out", args->out, "Output dataset file");
    filter->add_flag("--allow-simple", args->allow_simple, "Keep items with a single subtask");
    filter->add_option("--max-per-relation", args->max_per_relation, "Cap on items sharing a relation");
    filter->callback([args, &o] { run_filter(resolve_settings(o), *args); });

    auto* prompts = data->add_subcommand("prompts", "Write one decomposition prompt per item");
    common(prompts);
    prompts->add_option("--out", args->out, "Output directory for <qid>.prompt.txt files");
    prompts->callback([args, &o] { run_prompts(resolve_settings(o), *args); });

    auto* validate = data->add_subcommand("validate", "Check trajectories and write the review manifest");
    common(validate);
    validate->add_option("--traces", args->traces, "Directory of <qid>.trace.txt files");
    validate->add_option("--profile", o.profile, "Trace format: dara, dara_icl or agentbench");
    validate->add_option("--out", args->out, "Output directory for reports and the review manifest");
    validate->callback([args, &o] { run_validate(resolve_settings(o), *args); });

    auto* synthesize = data->add_subcommand("synthesize", "Generate grounded trajectories from gold forms");
    common(synthesize);
    synthesize->add_option("--topk", o.topk, "Schema items kept by relation and class filtering");
    synthesize->add_option("--deep-read-n", o.deep_read_n, "Candidates read in depth per step");
    synthesize->add_option("--out", args->out, "Output directory for <qid>.trace.txt files");
    synthesize->callback([args, &o] { run_synthesize(resolve_settings(o), *args); });
}

} // namespace kgqa::cli
