// Exercises the live chat-completions transport against an in-process HTTP
// server: success parsing, bearer auth, the one-retry policy on 5xx, and
// hard auth failures.
#ifdef ADAGENT_TEST_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include "adagent/errors.hpp"
#include "adagent/gateway.hpp"

#include "doctest.h"

#include <atomic>
#include <memory>
#include <thread>

using namespace adagent;

namespace {

struct LocalServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;
    std::atomic<int> hits{0};

    LocalServer() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
            ++hits;
            if (req.get_header_value("Authorization") != "Bearer test-key") {
                res.status = 401;
                res.set_content("{\"error\": \"bad key\"}", "application/json");
                return;
            }
            const auto body = nlohmann::json::parse(req.body);
            const std::string model = body.value("model", "");
            if (model == "flaky-once" && hits.load() == 1) {
                res.status = 503;
                res.set_content("overloaded", "text/plain");
                return;
            }
            if (model == "always-down") {
                res.status = 500;
                res.set_content("boom", "text/plain");
                return;
            }
            nlohmann::json reply;
            reply["choices"] = {{{"message", {{"role", "assistant"}, {"content", "hello"}}}}};
            reply["usage"] = {{"prompt_tokens", 42}, {"completion_tokens", 7}};
            res.set_content(reply.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        thread.join();
    }

    HttpBackendConfig config(const std::string& key = "test-key") const {
        HttpBackendConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
        c.api_key = key;
        c.timeout_s = 10.0;
        return c;
    }
};

LLMRequest chat_request(const std::string& model) {
    LLMRequest req;
    req.agent = AgentName::generator;
    req.model_id = model;
    req.temperature = 0.0;
    req.messages.push_back({ChatRole::user, "say hello"});
    return req;
}

} // namespace

TEST_CASE("http backend: parses content and usage from a chat reply") {
    LocalServer server;
    auto backend = make_http_backend(server.config());
    const LLMResponse resp = backend->complete(chat_request("gpt-4o"));
    CHECK(resp.content == "hello");
    CHECK(resp.input_tokens == 42);
    CHECK(resp.output_tokens == 7);
    CHECK(resp.web_search_calls == 0);
    CHECK(resp.latency_s > 0.0);
}

TEST_CASE("http backend: a search-enabled call bills one search") {
    LocalServer server;
    auto backend = make_http_backend(server.config());
    LLMRequest req = chat_request("gpt-4o");
    req.web_search_enabled = true;
    CHECK(backend->complete(req).web_search_calls == 1);
}

TEST_CASE("http backend: the gateway retries one 5xx then succeeds") {
    LocalServer server;
    TokenLedger ledger("http");
    LlmGateway gateway(make_http_backend(server.config()), PriceTable::builtin(), ledger);
    const LLMResponse resp = gateway.complete(chat_request("flaky-once"));
    CHECK(resp.content == "hello");
    CHECK(server.hits.load() == 2); // the failed attempt plus the retry
    CHECK(gateway.ledger().entries().size() == 1);
}

TEST_CASE("http backend: persistent 5xx surfaces BackendUnavailable after one retry") {
    LocalServer server;
    TokenLedger ledger("http");
    LlmGateway gateway(make_http_backend(server.config()), PriceTable::builtin(), ledger);
    try {
        (void)gateway.complete(chat_request("always-down"));
        FAIL("expected BackendUnavailable");
    } catch (const AgentError& e) {
        CHECK(e.code() == Errc::BackendUnavailable);
    }
    CHECK(server.hits.load() == 2); // bounded retries
}

TEST_CASE("http backend: auth failures are not retried") {
    LocalServer server;
    auto backend = make_http_backend(server.config("wrong-key"));
    try {
        (void)backend->complete(chat_request("gpt-4o"));
        FAIL("expected BackendUnavailable");
    } catch (const AgentError& e) {
        CHECK(e.code() == Errc::BackendUnavailable);
        CHECK(std::string(e.what()).find("401") != std::string::npos);
    }
    CHECK(server.hits.load() == 1);

    auto keyless = make_http_backend([&] {
        HttpBackendConfig c = server.config();
        c.api_key.clear();
        return c;
    }());
    CHECK_THROWS_AS((void)keyless->complete(chat_request("gpt-4o")), AgentError);
}

TEST_CASE("http backend: an unreachable endpoint is transient, then unavailable") {
    HttpBackendConfig config;
    config.base_url = "http://127.0.0.1:1"; // nothing listens there
    config.api_key = "test-key";
    config.timeout_s = 2.0;
    TokenLedger ledger("http");
    LlmGateway gateway(make_http_backend(config), PriceTable::builtin(), ledger);
    try {
        (void)gateway.complete(chat_request("gpt-4o"));
        FAIL("expected BackendUnavailable");
    } catch (const AgentError& e) {
        CHECK(e.code() == Errc::BackendUnavailable);
    }
}
