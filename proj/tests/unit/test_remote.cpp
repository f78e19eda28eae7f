// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <kgqa/error.hpp>
#include <kgqa/llm.hpp>
#include <kgqa/retrieval.hpp>
#include <kgqa/sparql.hpp>

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace kgqa;

namespace {

// A local HTTP server on an ephemeral port, stopped on scope exit.
class LocalServer {
public:
    LocalServer()
    {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer()
    {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace

TEST_CASE("remote LLM: request shape, auth and stop truncation")
{
    LocalServer local;
    nlohmann::json seen;
    std::string auth;
    local.server().Post("/v1", [&](const httplib::Request& req, httplib::Response& res) {
        seen = nlohmann::json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"content":"### Action 1.1.1: get_relations(m.x)\n### Obs 1.1.1: hallucinated"})",
                        "application/json");
    });
    ::setenv("KGQA_TEST_KEY", "secret", 1);
    LlmEndpointConfig config;
    config.url = local.url("/v1");
    config.api_key_env = "KGQA_TEST_KEY";
    RemoteLlmAdapter llm(config);
    const auto out = llm.complete({{"user", "hello"}}, {"### Obs"});
    CHECK(out == "### Action 1.1.1: get_relations(m.x)\n");
    CHECK(seen.at("messages").at(0).at("role") == "user");
    CHECK(seen.at("stop").at(0) == "### Obs");
    CHECK(auth == "Bearer secret");
}

TEST_CASE("remote LLM: retries transient failures, then gives up")
{
    LocalServer local;
    std::atomic<int> calls = 0;
    local.server().Post("/flaky", [&](const httplib::Request&, httplib::Response& res) {
        if (++calls < 2) {
            res.status = 503;
            return;
        }
        res.set_content(R"({"content":"ok"})", "application/json");
    });
    local.server().Post("/down", [&](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    local.server().Post("/bad", [&](const httplib::Request&, httplib::Response& res) { res.status = 400; });

    LlmEndpointConfig config;
    config.url = local.url("/flaky");
    config.max_retries = 2;
    CHECK(RemoteLlmAdapter(config).complete({{"user", "x"}}, {}) == "ok");
    CHECK(calls == 2);

    config.url = local.url("/down");
    config.max_retries = 1;
    try {
        (void)RemoteLlmAdapter(config).complete({{"user", "x"}}, {});
        FAIL("expected ProviderError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ProviderError);
    }

    config.url = local.url("/bad");
    CHECK_THROWS_AS((void)RemoteLlmAdapter(config).complete({{"user", "x"}}, {}), Error);

    LlmEndpointConfig none;
    CHECK_THROWS_AS(RemoteLlmAdapter{none}, Error);
}

TEST_CASE("remote embeddings")
{
    LocalServer local;
    local.server().Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json vectors = nlohmann::json::array();
        for (const auto& t : body.at("texts")) {
            const std::string s = t.get<std::string>();
            vectors.push_back({s.find("olympic") != std::string::npos ? 1.0 : 0.0, 0.5});
        }
        res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
    });
    local.server().Post("/short", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"vectors":[[1.0]]})", "application/json");
    });

    auto provider = std::make_shared<RemoteEmbeddingProvider>(local.url("/embed"), 2);
    const Retriever r(provider);
    const std::vector<std::string> c = {"type.object.name", "olympics.olympic_mascot.olympic_games"};
    CHECK(r.rank("olympic", c).at(0).name == "olympics.olympic_mascot.olympic_games");

    RemoteEmbeddingProvider wrong(local.url("/short"), 2);
    const std::vector<std::string> one = {"x"};
    try {
        (void)wrong.embed(one);
        FAIL("expected ProviderError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ProviderError);
    }
}

TEST_CASE("SPARQL endpoint client")
{
    LocalServer local;
    std::string query;
    local.server().Post("/sparql", [&](const httplib::Request& req, httplib::Response& res) {
        query = req.has_param("query") ? req.get_param_value("query") : req.body;
        res.set_content(
            R"({"head":{"vars":["x0"]},"results":{"bindings":[{"x0":{"type":"uri","value":"http://rdf.freebase.com/ns/m.0olygames1"}}]}})",
            "application/sparql-results+json");
    });
    const SparqlEndpoint endpoint(local.url("/sparql"));
    const auto d = endpoint.query("SELECT DISTINCT ?x0 WHERE { ns:m.04dwjbg ns:olympics.olympic_mascot.olympic_games ?x0 . }");
    CHECK(d.entities() == EntitySet{"m.0olygames1"});
    CHECK(query.find("SELECT DISTINCT ?x0") != std::string::npos);

    const SparqlEndpoint dead("http://127.0.0.1:1/sparql", std::chrono::seconds(2));
    CHECK_THROWS_AS((void)dead.query("SELECT ?x WHERE {}"), Error);
}
