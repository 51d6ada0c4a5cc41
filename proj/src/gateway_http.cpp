#include "adagent/errors.hpp"
#include "adagent/gateway.hpp"
#include "adagent/util.hpp"

#include "httplib.h"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <memory>

namespace adagent {

using nlohmann::json;

namespace {

constexpr const char* kDefaultBase = "https://api.openai.com/v1";

// Splits "https://host:port/prefix" into client origin and path prefix.
struct SplitUrl {
    std::string origin;
    std::string prefix;
};

SplitUrl split_base_url(const std::string& base) {
    std::string rest = base;
    std::string scheme = "https://";
    if (starts_with_ci(rest, "http://")) {
        scheme = "http://";
        rest = rest.substr(7);
    } else if (starts_with_ci(rest, "https://")) {
        rest = rest.substr(8);
    }
    const auto slash = rest.find('/');
    SplitUrl out;
    if (slash == std::string::npos) {
        out.origin = scheme + rest;
        out.prefix = "";
    } else {
        out.origin = scheme + rest.substr(0, slash);
        out.prefix = rest.substr(slash);
        while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    }
    return out;
}

class HttpBackend : public CompletionBackend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
        if (config_.base_url.empty()) config_.base_url = kDefaultBase;
    }

    LLMResponse complete(const LLMRequest& request) override {
        if (config_.api_key.empty())
            raise(Errc::BackendUnavailable,
                  "no API key configured (set AD_AGENT_API_KEY)");

        const SplitUrl url = split_base_url(config_.base_url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (starts_with_ci(url.origin, "https://"))
            raise(Errc::BackendUnavailable,
                  "built without TLS support; https endpoints are unavailable");
#endif
        httplib::Client client(url.origin);
        client.set_connection_timeout(static_cast<time_t>(config_.timeout_s), 0);
        client.set_read_timeout(static_cast<time_t>(config_.timeout_s), 0);
        client.set_bearer_token_auth(config_.api_key);

        json body;
        body["model"] = request.model_id;
        json msgs = json::array();
        for (const auto& m : request.messages)
            msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
        body["messages"] = std::move(msgs);
        if (request.temperature) body["temperature"] = *request.temperature;
        if (request.web_search_enabled) {
            body["web_search_options"] = json::object();
        }

        const auto started = std::chrono::steady_clock::now();
        auto res = client.Post(url.prefix + "/chat/completions", body.dump(),
                               "application/json");
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        if (!res)
            throw TransientBackendError("connection to " + url.origin + " failed: " +
                                        httplib::to_string(res.error()));
        if (res->status == 429 || res->status >= 500)
            throw TransientBackendError("HTTP " + std::to_string(res->status) + " from provider");
        if (res->status != 200)
            raise(Errc::BackendUnavailable,
                  "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 400));

        json reply;
        try {
            reply = json::parse(res->body);
        } catch (const json::exception& e) {
            raise(Errc::BackendUnavailable, std::string("unparseable provider reply: ") + e.what());
        }

        LLMResponse out;
        try {
            out.content = reply.at("choices").at(0).at("message").value("content", "");
        } catch (const json::exception&) {
            raise(Errc::BackendUnavailable, "provider reply lacks choices[0].message");
        }
        out.input_tokens = reply.value("usage", json::object()).value("prompt_tokens", std::int64_t{0});
        out.output_tokens =
            reply.value("usage", json::object()).value("completion_tokens", std::int64_t{0});
        out.latency_s = elapsed;
        // The chat API does not itemize searches; one search-enabled call is
        // billed as one search.
        out.web_search_calls = request.web_search_enabled ? 1 : 0;
        return out;
    }

private:
    HttpBackendConfig config_;
};

} // namespace

std::shared_ptr<CompletionBackend> make_http_backend(HttpBackendConfig config) {
    return std::make_shared<HttpBackend>(std::move(config));
}

std::shared_ptr<CompletionBackend> make_http_backend_from_env() {
    HttpBackendConfig config;
    if (const char* key = std::getenv("AD_AGENT_API_KEY")) config.api_key = key;
    if (const char* base = std::getenv("AD_AGENT_API_BASE")) config.base_url = base;
    return make_http_backend(std::move(config));
}

} // namespace adagent
