#pragma once

#include "json.hpp"

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace adagent {

enum class AgentName { processor, selector, info_miner, generator, reviewer, evaluator, optimizer };
enum class ChatRole { system, user, assistant };

const char* to_string(AgentName a);
const char* to_string(ChatRole r);
std::optional<AgentName> agent_from_string(std::string_view s);
std::optional<ChatRole> role_from_string(std::string_view s);

struct ChatMessage {
    ChatRole role{};
    std::string content;
};

struct LLMRequest {
    AgentName agent{};
    std::string model_id;
    std::vector<ChatMessage> messages;
    bool web_search_enabled = false;
    std::optional<double> temperature; // absent = provider default

    // Throws TypeMismatch when an invariant is broken (empty messages,
    // assistant-first conversation, negative temperature).
    void validate() const;
};

struct LLMResponse {
    std::string content;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    double latency_s = 0.0;
    int web_search_calls = 0;
};

// Stable content hash of (agent, model, normalized messages, tools,
// temperature). Prompt edits change the key, so stale recordings surface as
// ReplayMiss instead of silently matching.
std::string request_key(const LLMRequest& request);

nlohmann::json request_to_json(const LLMRequest& request);
LLMRequest request_from_json(const nlohmann::json& j);
nlohmann::json response_to_json(const LLMResponse& response);
LLMResponse response_from_json(const nlohmann::json& j);

// ---- backends ----

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual LLMResponse complete(const LLMRequest& request) = 0;
};

// Answers from a JSONL transcript, keyed by request_key. Multiple recordings
// under one key (e.g. the selector's three identical recommendation prompts)
// are served FIFO; once drained, the last recording is re-served. An unknown
// key raises ReplayMiss.
class ReplayBackend : public CompletionBackend {
public:
    explicit ReplayBackend(const std::filesystem::path& transcript_path);
    LLMResponse complete(const LLMRequest& request) override;

    std::size_t recording_count() const;

private:
    struct Queue {
        std::deque<LLMResponse> pending;
        LLMResponse last;
    };
    std::map<std::string, Queue> recordings_;
    mutable std::mutex mu_;
};

// Wraps another backend and appends one JSONL record per completed call.
class RecordingBackend : public CompletionBackend {
public:
    RecordingBackend(std::shared_ptr<CompletionBackend> inner,
                     const std::filesystem::path& transcript_path);
    LLMResponse complete(const LLMRequest& request) override;

private:
    std::shared_ptr<CompletionBackend> inner_;
    std::filesystem::path path_;
    std::mutex mu_;
};

struct HttpBackendConfig {
    std::string base_url;   // e.g. https://api.openai.com/v1
    std::string api_key;
    double timeout_s = 120.0;
};

// Chat-completions transport. The only network code in the artifact.
std::shared_ptr<CompletionBackend> make_http_backend(HttpBackendConfig config);

// Reads AD_AGENT_API_KEY / AD_AGENT_API_BASE from the environment.
std::shared_ptr<CompletionBackend> make_http_backend_from_env();

// ---- pricing ----

struct ModelRates {
    double input_per_token = 0.0;  // US$ per token
    double output_per_token = 0.0;
};

class PriceTable {
public:
    static PriceTable builtin();
    static PriceTable load_file(const std::filesystem::path& p);
    // File rates are US$ per 1M tokens; converted to per-token on load.
    static PriceTable load_json_text(const std::string& text);

    double cost(const std::string& model_id, std::int64_t input_tokens,
                std::int64_t output_tokens, int web_search_calls) const;

    double web_search_call_rate() const { return web_search_call_rate_; }

private:
    std::map<std::string, ModelRates> rates_;
    double web_search_call_rate_ = 0.0;
};

// ---- ledger ----

struct LedgerEntry {
    AgentName agent{};
    std::string model_id;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    int web_search_calls = 0;
    double latency_s = 0.0;
    double cost = 0.0;
};

struct LedgerTotals {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    int web_search_calls = 0;
    double latency_s = 0.0;
    double cost = 0.0;
};

class TokenLedger {
public:
    TokenLedger() = default;
    explicit TokenLedger(std::string session_id) : session_id_(std::move(session_id)) {}

    void append(LedgerEntry entry) { entries_.push_back(std::move(entry)); }
    const std::vector<LedgerEntry>& entries() const { return entries_; }
    const std::string& session_id() const { return session_id_; }

    // Recomputed from the entries so totals cannot drift from their sum.
    LedgerTotals totals() const;

private:
    std::string session_id_;
    std::vector<LedgerEntry> entries_;
};

bool ledger_entries_equal(const TokenLedger& a, const TokenLedger& b);

// ---- gateway ----

struct WebSearchSummary {
    std::string summary;
    double latency_s = 0.0;
};

// Front door for every agent call: validates requests, retries one transient
// transport failure, bills each response into the session ledger.
class LlmGateway {
public:
    LlmGateway(std::shared_ptr<CompletionBackend> backend, PriceTable prices,
               std::string session_id);
    // Bills into a caller-owned ledger (the session workspace's).
    LlmGateway(std::shared_ptr<CompletionBackend> backend, PriceTable prices,
               TokenLedger& external_ledger);

    LLMResponse complete(const LLMRequest& request);

    // Search + summarize through the backend's web_search tool. The prompt
    // demands a final fenced mapping of constructor defaults so the miner
    // can parse the result mechanically.
    WebSearchSummary web_search_summarize(const std::string& query, const std::string& model_id,
                                          AgentName agent = AgentName::info_miner,
                                          const std::string& extra_instruction = {});

    const TokenLedger& ledger() const { return *ledger_; }
    TokenLedger& ledger() { return *ledger_; }
    const PriceTable& prices() const { return prices_; }

private:
    std::shared_ptr<CompletionBackend> backend_;
    PriceTable prices_;
    TokenLedger own_ledger_;
    TokenLedger* ledger_ = &own_ledger_;
};

} // namespace adagent
