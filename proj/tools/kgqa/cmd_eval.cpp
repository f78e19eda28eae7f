// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <kgqa/error.hpp>
#include <kgqa/eval.hpp>
#include <kgqa/schema.hpp>
#include <kgqa/sparql.hpp>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <iostream>
#include <set>

namespace kgqa::cli {

namespace {

struct EvalArgs {
    std::optional<fs::path> pred;
    std::optional<fs::path> dataset;
    std::optional<fs::path> out;
};

void run_eval(const Settings& s, const EvalArgs& args)
{
    if (!args.pred)
        config_error("--pred is required");
    if (!args.dataset)
        config_error("--dataset is required");

    std::vector<DatasetItem> dataset = load_dataset(*args.dataset);
    std::vector<Prediction> predictions = load_predictions(*args.pred);

    std::optional<std::size_t> zero_shot_items;
    if (s.zero_shot) {
        if (!s.train)
            config_error("--zero-shot needs --train <dataset>");
        // Unknown qids are checked against the full dataset before filtering.
        std::set<std::string> known;
        for (const auto& item : dataset)
            known.insert(item.qid);
        std::vector<std::string> unknown;
        for (const auto& p : predictions)
            if (!known.contains(p.qid))
                unknown.push_back(p.qid);
        if (!unknown.empty())
            throw Error(ErrorCode::UnknownQid, fmt::format("unknown qid(s): {}", fmt::join(unknown, ", ")));
        dataset = zero_shot_filter(dataset, load_dataset(*s.train), *s.zero_shot);
        std::set<std::string> kept;
        for (const auto& item : dataset)
            kept.insert(item.qid);
        std::erase_if(predictions, [&](const Prediction& p) { return !kept.contains(p.qid); });
        zero_shot_items = dataset.size();
    }

    std::optional<KnowledgeGraph> graph;
    std::optional<SchemaView> schema;
    std::optional<SparqlEndpoint> endpoint;
    Executor executor;
    if (s.triples) {
        graph.emplace(require_graph(s));
        executor = graph_executor(*graph);
    } else if (s.sparql_endpoint) {
        schema.emplace(require_schema(s));
        endpoint.emplace(*s.sparql_endpoint);
        executor = endpoint_executor(*endpoint, *schema);
    }

    EvalReport report = evaluate_run(predictions, dataset, executor, s.jobs);
    report.zero_shot_items = zero_shot_items;
    if (args.out)
        write_text(*args.out, report.to_json().dump(2) + "\n");
    std::cout << report.table();
}

} // namespace

void register_eval(CLI::App& app, Overrides& o)
{
    auto* eval = app.add_subcommand("eval", "Score predictions against a dataset (EM and answer F1)");
    auto args = std::make_shared<EvalArgs>();
    add_common_options(*eval, o);
    add_kg_options(*eval, o);
    eval->add_option("--sparql", o.sparql_endpoint, "SPARQL endpoint used when no --kg is given");
    eval->add_option("--pred", args->pred, "Predictions file (one JSON record per line)");
    eval->add_option("--dataset", args->dataset, "Dataset file (one JSON record per line)");
    eval->add_option("--out", args->out, "Write the report document here");
    eval->add_flag("--zero-shot{at_least_one}", o.zero_shot,
                   "Score only zero-shot items; --zero-shot=strict requires every schema item unseen");
    eval->add_option("--train", o.train, "Training dataset for --zero-shot");
    eval->callback([args, &o] { run_eval(resolve_settings(o), *args); });
}

} // namespace kgqa::cli
