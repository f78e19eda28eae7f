// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <kgqa/error.hpp>

#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

namespace kgqa::cli {

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, fmt::format("cannot read {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, fmt::format("cannot write {}", path.string()));
    out << text;
}

void add_common_options(CLI::App& app, Overrides& o)
{
    app.add_option("--config", o.config, "JSON config file (default: $DARA_CONFIG)");
    app.add_option("--seed", o.seed, "Seed for every random choice");
    app.add_option("--jobs", o.jobs, "Items processed in parallel");
}

void add_kg_options(CLI::App& app, Overrides& o)
{
    app.add_option("--kg", o.triples, "Triples file (subject<TAB>predicate<TAB>object)");
    app.add_option("--schema", o.schema, "Schema document (classes, relations, instances, labels)");
}

void add_agent_options(CLI::App& app, Overrides& o)
{
    app.add_option("--profile", o.profile, "dara, dara_icl or agentbench");
    app.add_option("--llm", o.llm, "Model endpoint URL or scripted:<dir> of <qid>.trace.txt files");
    app.add_option("--api-key-env", o.api_key_env, "Environment variable holding the endpoint API key");
    app.add_option("--max-retries", o.max_retries, "Retries for transient endpoint failures");
    app.add_option("--retriever", o.retriever, "lexical or embedding");
    app.add_option("--topk", o.topk, "Schema items kept by relation and class filtering");
    app.add_option("--deep-read-n", o.deep_read_n, "Candidates read in depth per step");
    app.add_option("--max-tasks", o.max_tasks, "Subtask budget");
    app.add_option("--max-steps", o.max_steps, "Step budget per subtask");
    app.add_option("--max-actions", o.max_actions, "Action budget per step");
    app.add_option("--baseline-max-actions", o.baseline_max_actions, "Action budget of the agentbench profile");
}

} // namespace kgqa::cli

int main(int argc, char** argv)
{
    using namespace kgqa::cli;
    CLI::App app{"Knowledge-graph question answering: logical forms, agent runs, scoring and data tools"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "kgqa 0.1.0");
    Overrides overrides;
    register_sexpr(app, overrides);
    register_agent(app, overrides);
    register_eval(app, overrides);
    register_data(app, overrides);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    } catch (const ExitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code;
    } catch (const kgqa::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == kgqa::ErrorCode::ConfigError ? kExitConfig : kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
