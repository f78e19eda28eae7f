// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <kgqa/agent.hpp>
#include <kgqa/error.hpp>
#include <kgqa/eval.hpp>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <thread>

namespace kgqa::cli {

using nlohmann::json;

namespace {

struct AgentArgs {
    std::optional<fs::path> dataset;
    std::optional<fs::path> out;
};

struct ItemResult {
    std::string qid;
    std::optional<ReasoningTrace> trace;
    double wall_ms = 0;
};

constexpr std::string_view kScripted = "scripted:";

void run_items(const Settings& s, const AgentArgs& args, bool replay)
{
    if (!args.dataset)
        config_error("--dataset is required");
    if (!args.out)
        config_error("--out is required");
    if (!s.llm || s.llm->empty())
        config_error("a model is required: pass --llm <endpoint URL | scripted:<dir>> or set llm.endpoint");
    const bool scripted = s.llm->rfind(kScripted, 0) == 0;
    if (replay && !scripted)
        config_error("agent replay needs --llm scripted:<dir>");

    const KnowledgeGraph graph = require_graph(s);
    const Retriever retriever = make_retriever(s);
    const std::vector<DatasetItem> dataset = load_dataset(*args.dataset);

    std::unique_ptr<LlmAdapter> shared;
    fs::path script_dir;
    if (scripted) {
        script_dir = s.llm->substr(kScripted.size());
        if (!fs::is_directory(script_dir))
            config_error(fmt::format("scripted trace directory {} does not exist", script_dir.string()));
    } else {
        LlmEndpointConfig cfg = s.endpoint;
        cfg.url = *s.llm;
        const char* key = cfg.api_key_env.empty() ? nullptr : std::getenv(cfg.api_key_env.c_str());
        if (!key || !*key)
            config_error(fmt::format("the endpoint API key is missing: set ${}", cfg.api_key_env));
        try {
            shared = std::make_unique<RemoteLlmAdapter>(cfg);
        } catch (const Error& e) {
            config_error(e.what());
        }
    }

    std::vector<const DatasetItem*> items;
    for (const auto& item : dataset)
        if (!replay || fs::exists(script_dir / (item.qid + ".trace.txt")))
            items.push_back(&item);

    fs::create_directories(*args.out);
    std::vector<ItemResult> results(items.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
            const DatasetItem& item = *items[i];
            const auto start = std::chrono::steady_clock::now();
            std::unique_ptr<LlmAdapter> own;
            LlmAdapter* llm = shared.get();
            ReasoningTrace trace;
            try {
                if (scripted) {
                    const fs::path path = script_dir / (item.qid + ".trace.txt");
                    const std::string text = fs::exists(path) ? read_text(path) : std::string();
                    own = std::make_unique<ScriptedAdapter>(text, s.agent.profile);
                    llm = own.get();
                }
                trace = run_agent(item.question, item.entities, graph, *llm, s.agent, retriever);
            } catch (const std::exception& e) {
                trace.question = item.question;
                trace.entities = item.entities;
                trace.profile = s.agent.profile;
                trace.outcome = Outcome::ActionError;
                TraceEvent error;
                error.kind = EventKind::Error;
                error.text = e.what();
                trace.events.push_back(std::move(error));
            }
            results[i].qid = item.qid;
            results[i].wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            results[i].trace = std::move(trace);
        }
    };
    std::vector<std::thread> pool;
    const std::size_t jobs = std::min<std::size_t>(s.jobs, std::max<std::size_t>(items.size(), 1));
    for (std::size_t j = 0; j < jobs; ++j)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();

    std::vector<Prediction> predictions;
    json manifest_items = json::array();
    std::map<std::string, std::size_t> outcomes;
    std::size_t calls = 0, prompt_tokens = 0, completion_tokens = 0;
    double total_ms = 0;
    for (const auto& r : results) {
        const ReasoningTrace& trace = *r.trace;
        const fs::path trace_path = *args.out / (r.qid + ".trace.txt");
        const fs::path meta_path = *args.out / (r.qid + ".meta.json");
        write_text(trace_path, trace.text());
        write_text(meta_path, trace_metadata(trace, r.qid, r.wall_ms).dump(2) + "\n");
        Prediction p;
        p.qid = r.qid;
        p.expr = trace.final_expr;
        p.outcome = std::string(to_string(trace.outcome));
        predictions.push_back(std::move(p));
        ++outcomes[std::string(to_string(trace.outcome))];
        calls += trace.llm_calls;
        prompt_tokens += trace.prompt_tokens;
        completion_tokens += trace.completion_tokens;
        total_ms += r.wall_ms;
        manifest_items.push_back({{"qid", r.qid},
                                  {"trace", trace_path.filename().string()},
                                  {"metadata", meta_path.filename().string()},
                                  {"outcome", to_string(trace.outcome)},
                                  {"wall_time_ms", r.wall_ms},
                                  {"llm_calls", trace.llm_calls},
                                  {"prompt_tokens", trace.prompt_tokens},
                                  {"completion_tokens", trace.completion_tokens}});
    }
    const fs::path pred_path = *args.out / "predictions.jsonl";
    save_predictions(pred_path, predictions);
    json manifest = {{"config", s.to_json()},
                     {"dataset", args.dataset->generic_string()},
                     {"profile", to_string(s.agent.profile)},
                     {"output_dir", args.out->generic_string()},
                     {"predictions", pred_path.filename().string()},
                     {"items", std::move(manifest_items)},
                     {"totals",
                      {{"items", results.size()},
                       {"outcomes", outcomes},
                       {"llm_calls", calls},
                       {"prompt_tokens", prompt_tokens},
                       {"completion_tokens", completion_tokens},
                       {"wall_time_ms", total_ms}}}};
    write_text(*args.out / "manifest.json", manifest.dump(2) + "\n");

    std::cout << fmt::format("{} item(s)", results.size());
    for (const auto& [name, n] : outcomes)
        std::cout << fmt::format(", {} {}", name, n);
    std::cout << fmt::format("\ntraces, predictions and manifest written to {}\n", args.out->string());
}

} // namespace

void register_agent(CLI::App& app, Overrides& o)
{
    auto* agent = app.add_subcommand("agent", "Run the agent over a dataset");
    agent->require_subcommand(1);
    auto args = std::make_shared<AgentArgs>();
    for (const auto& [name, help, replay] : {std::tuple{"run", "Run every dataset item", false},
                                             std::tuple{"replay", "Replay recorded traces (items without one are skipped)", true}}) {
        auto* cmd = agent->add_subcommand(name, help);
        add_common_options(*cmd, o);
        add_kg_options(*cmd, o);
        add_agent_options(*cmd, o);
        cmd->add_option("--dataset", args->dataset, "Dataset file (one JSON record per line)");
        cmd->add_option("--out", args->out, "Output directory for traces, sidecars, predictions and the manifest");
        const bool is_replay = replay;
        cmd->callback([args, &o, is_replay] { run_items(resolve_settings(o), *args, is_replay); });
    }
}

} // namespace kgqa::cli
