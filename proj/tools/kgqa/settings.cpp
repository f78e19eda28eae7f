// SPDX-License-Identifier: Apache-2.0
#include "settings.hpp"

#include <kgqa/error.hpp>
#include <kgqa/schema.hpp>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>

namespace kgqa::cli {

using nlohmann::json;

void config_error(const std::string& what) { throw ExitError(kExitConfig, what); }

namespace {

void only_keys(const json& section, const std::string& name, std::set<std::string> allowed)
{
    if (!section.is_object())
        config_error(fmt::format("config section '{}' must be an object", name));
    for (const auto& [key, _] : section.items())
        if (!allowed.contains(key))
            config_error(fmt::format("unknown config key '{}.{}'", name, key));
}

ZeroShotReading parse_reading(const std::string& text)
{
    if (text == "at_least_one" || text == "at-least-one" || text.empty())
        return ZeroShotReading::AtLeastOne;
    if (text == "strict")
        return ZeroShotReading::Strict;
    config_error(fmt::format("zero-shot reading must be 'at_least_one' or 'strict', got '{}'", text));
}

template <typename T>
T get(const json& section, const char* key, const std::string& where)
{
    try {
        return section.at(key).get<T>();
    } catch (const json::exception&) {
        config_error(fmt::format("config key '{}.{}' has the wrong type", where, key));
    }
}

void apply_file(Settings& s, const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        config_error(fmt::format("cannot read config file {}", path.string()));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        config_error(fmt::format("config file {} is not valid JSON: {}", path.string(), e.what()));
    }
    only_keys(doc, "<root>", {"kg", "llm", "retriever", "agent", "eval"});
    const fs::path base = path.parent_path();
    const auto local = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    if (doc.contains("kg")) {
        const auto& kg = doc["kg"];
        only_keys(kg, "kg", {"triples", "schema", "endpoint"});
        if (kg.contains("triples"))
            s.triples = local(get<std::string>(kg, "triples", "kg"));
        if (kg.contains("schema"))
            s.schema = local(get<std::string>(kg, "schema", "kg"));
        if (kg.contains("endpoint"))
            s.sparql_endpoint = get<std::string>(kg, "endpoint", "kg");
    }
    if (doc.contains("llm")) {
        const auto& llm = doc["llm"];
        only_keys(llm, "llm", {"endpoint", "api_key_env", "max_retries", "timeout_s", "max_in_flight"});
        if (llm.contains("endpoint")) {
            std::string e = get<std::string>(llm, "endpoint", "llm");
            if (e.rfind("scripted:", 0) == 0)
                e = "scripted:" + local(e.substr(9)).string();
            s.llm = e;
        }
        if (llm.contains("api_key_env"))
            s.endpoint.api_key_env = get<std::string>(llm, "api_key_env", "llm");
        if (llm.contains("max_retries"))
            s.endpoint.max_retries = get<int>(llm, "max_retries", "llm");
        if (llm.contains("timeout_s"))
            s.endpoint.timeout = std::chrono::seconds(get<int>(llm, "timeout_s", "llm"));
        if (llm.contains("max_in_flight"))
            s.endpoint.max_in_flight = get<std::ptrdiff_t>(llm, "max_in_flight", "llm");
    }
    if (doc.contains("retriever")) {
        const auto& r = doc["retriever"];
        only_keys(r, "retriever", {"mode", "endpoint", "dimension"});
        if (r.contains("mode"))
            s.retriever_mode = get<std::string>(r, "mode", "retriever");
        if (r.contains("endpoint"))
            s.retriever_endpoint = get<std::string>(r, "endpoint", "retriever");
        if (r.contains("dimension"))
            s.retriever_dimension = get<std::size_t>(r, "dimension", "retriever");
    }
    if (doc.contains("agent")) {
        const auto& a = doc["agent"];
        only_keys(a, "agent", {"profile", "topk", "deep_read_n", "max_tasks", "max_steps_per_task",
                               "max_actions_per_step", "baseline_max_actions"});
        if (a.contains("profile"))
            s.agent.profile = parse_profile(get<std::string>(a, "profile", "agent"));
        const std::pair<const char*, std::size_t*> budgets[] = {
            {"topk", &s.agent.topk},
            {"deep_read_n", &s.agent.deep_read_n},
            {"max_tasks", &s.agent.max_tasks},
            {"max_steps_per_task", &s.agent.max_steps_per_task},
            {"max_actions_per_step", &s.agent.max_actions_per_step},
            {"baseline_max_actions", &s.agent.baseline_max_actions},
        };
        for (const auto& [key, field] : budgets)
            if (a.contains(key))
                *field = get<std::size_t>(a, key, "agent");
    }
    if (doc.contains("eval")) {
        const auto& e = doc["eval"];
        only_keys(e, "eval", {"zero_shot", "train", "jobs"});
        if (e.contains("zero_shot")) {
            const auto mode = get<std::string>(e, "zero_shot", "eval");
            if (mode != "off")
                s.zero_shot = parse_reading(mode);
        }
        if (e.contains("train"))
            s.train = local(get<std::string>(e, "train", "eval"));
        if (e.contains("jobs"))
            s.jobs = get<std::size_t>(e, "jobs", "eval");
    }
}

} // namespace

Settings resolve_settings(const Overrides& f)
{
    Settings s;
    std::optional<std::string> config = f.config;
    if (!config)
        if (const char* env = std::getenv("DARA_CONFIG"); env && *env)
            config = env;
    try {
        if (config)
            apply_file(s, *config);

        if (f.triples)
            s.triples = f.triples;
        if (f.schema)
            s.schema = f.schema;
        if (f.sparql_endpoint)
            s.sparql_endpoint = f.sparql_endpoint;
        if (f.llm)
            s.llm = f.llm;
        if (f.api_key_env)
            s.endpoint.api_key_env = *f.api_key_env;
        if (f.max_retries)
            s.endpoint.max_retries = *f.max_retries;
        if (f.retriever)
            s.retriever_mode = *f.retriever;
        if (f.profile)
            s.agent.profile = parse_profile(*f.profile);
        if (f.topk)
            s.agent.topk = *f.topk;
        if (f.deep_read_n)
            s.agent.deep_read_n = *f.deep_read_n;
        if (f.max_tasks)
            s.agent.max_tasks = *f.max_tasks;
        if (f.max_steps)
            s.agent.max_steps_per_task = *f.max_steps;
        if (f.max_actions)
            s.agent.max_actions_per_step = *f.max_actions;
        if (f.baseline_max_actions)
            s.agent.baseline_max_actions = *f.baseline_max_actions;
        if (f.zero_shot)
            s.zero_shot = parse_reading(*f.zero_shot);
        if (f.train)
            s.train = f.train;
        if (f.jobs)
            s.jobs = *f.jobs;
        if (f.seed)
            s.seed = *f.seed;

        s.agent.validate();
        (void)parse_retrieval_mode(s.retriever_mode);
        if (s.jobs == 0)
            config_error("--jobs must be at least 1");
    } catch (const Error& e) {
        config_error(e.what());
    }
    return s;
}

json Settings::to_json() const
{
    const auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
    const auto path = [](const std::optional<fs::path>& p) { return p ? json(p->generic_string()) : json(nullptr); };
    json zs = zero_shot ? json(*zero_shot == ZeroShotReading::Strict ? "strict" : "at_least_one") : json("off");
    return {
        {"kg", {{"triples", path(triples)}, {"schema", path(schema)}, {"endpoint", opt(sparql_endpoint)}}},
        {"llm",
         {{"endpoint", opt(llm)},
          {"api_key_env", endpoint.api_key_env},
          {"max_retries", endpoint.max_retries},
          {"timeout_s", endpoint.timeout.count()},
          {"max_in_flight", endpoint.max_in_flight}}},
        {"retriever",
         {{"mode", retriever_mode}, {"endpoint", opt(retriever_endpoint)}, {"dimension", retriever_dimension}}},
        {"agent",
         {{"profile", std::string(kgqa::to_string(agent.profile))},
          {"topk", agent.topk},
          {"deep_read_n", agent.deep_read_n},
          {"max_tasks", agent.max_tasks},
          {"max_steps_per_task", agent.max_steps_per_task},
          {"max_actions_per_step", agent.max_actions_per_step},
          {"baseline_max_actions", agent.baseline_max_actions}}},
        {"eval", {{"zero_shot", zs}, {"train", path(train)}, {"jobs", jobs}}},
        {"seed", seed},
    };
}

SchemaView require_schema(const Settings& s)
{
    if (!s.schema)
        config_error("a schema is required: pass --schema or set kg.schema in the config file");
    return load_schema(*s.schema);
}

KnowledgeGraph require_graph(const Settings& s)
{
    if (!s.triples)
        config_error("a knowledge graph is required: pass --kg or set kg.triples in the config file");
    if (!s.schema)
        config_error("a schema is required: pass --schema or set kg.schema in the config file");
    return load_graph(*s.triples, *s.schema);
}

Retriever make_retriever(const Settings& s)
{
    if (parse_retrieval_mode(s.retriever_mode) == RetrievalMode::Lexical)
        return Retriever{};
    std::shared_ptr<EmbeddingProvider> provider;
    if (s.retriever_endpoint)
        provider = std::make_shared<RemoteEmbeddingProvider>(*s.retriever_endpoint, s.retriever_dimension);
    else
        provider = std::make_shared<HashingEmbeddingProvider>(s.retriever_dimension);
    return Retriever(std::make_shared<CachingEmbeddingProvider>(std::move(provider)));
}

} // namespace kgqa::cli
