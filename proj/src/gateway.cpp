#include "adagent/gateway.hpp"

#include "adagent/errors.hpp"
#include "adagent/util.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace adagent {

using nlohmann::json;

const char* to_string(AgentName a) {
    switch (a) {
        case AgentName::processor: return "processor";
        case AgentName::selector: return "selector";
        case AgentName::info_miner: return "info_miner";
        case AgentName::generator: return "generator";
        case AgentName::reviewer: return "reviewer";
        case AgentName::evaluator: return "evaluator";
        case AgentName::optimizer: return "optimizer";
    }
    return "?";
}

const char* to_string(ChatRole r) {
    switch (r) {
        case ChatRole::system: return "system";
        case ChatRole::user: return "user";
        case ChatRole::assistant: return "assistant";
    }
    return "?";
}

std::optional<AgentName> agent_from_string(std::string_view s) {
    static const std::pair<const char*, AgentName> table[] = {
        {"processor", AgentName::processor},   {"selector", AgentName::selector},
        {"info_miner", AgentName::info_miner}, {"generator", AgentName::generator},
        {"reviewer", AgentName::reviewer},     {"evaluator", AgentName::evaluator},
        {"optimizer", AgentName::optimizer},
    };
    for (const auto& [name, value] : table)
        if (s == name) return value;
    return std::nullopt;
}

std::optional<ChatRole> role_from_string(std::string_view s) {
    if (s == "system") return ChatRole::system;
    if (s == "user") return ChatRole::user;
    if (s == "assistant") return ChatRole::assistant;
    return std::nullopt;
}

void LLMRequest::validate() const {
    if (messages.empty()) raise(Errc::TypeMismatch, "request has no messages");
    if (messages.front().role == ChatRole::assistant)
        raise(Errc::TypeMismatch, "first message must be system or user");
    if (model_id.empty()) raise(Errc::TypeMismatch, "request has no model id");
    if (temperature && *temperature < 0.0)
        raise(Errc::TypeMismatch, "temperature must be >= 0");
}

std::string request_key(const LLMRequest& request) {
    // Canonical form: sorted object keys (nlohmann objects are ordered maps),
    // whitespace-normalized message content, fixed-format temperature.
    json canon;
    canon["agent"] = to_string(request.agent);
    canon["model"] = request.model_id;
    json msgs = json::array();
    for (const auto& m : request.messages) {
        msgs.push_back({{"content", normalize_ws(m.content)}, {"role", to_string(m.role)}});
    }
    canon["messages"] = std::move(msgs);
    json tools = json::array();
    if (request.web_search_enabled) tools.push_back("web_search");
    canon["tools"] = std::move(tools);
    canon["temperature"] = request.temperature ? format_double(*request.temperature)
                                               : std::string("default");
    return to_hex(fnv1a64(canon.dump()));
}

json request_to_json(const LLMRequest& request) {
    json j;
    j["agent"] = to_string(request.agent);
    j["model"] = request.model_id;
    json msgs = json::array();
    for (const auto& m : request.messages)
        msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    j["messages"] = std::move(msgs);
    json tools = json::array();
    if (request.web_search_enabled) tools.push_back("web_search");
    j["tools"] = std::move(tools);
    if (request.temperature) j["temperature"] = *request.temperature;
    return j;
}

LLMRequest request_from_json(const json& j) {
    LLMRequest req;
    const auto agent = agent_from_string(j.value("agent", ""));
    if (!agent) raise(Errc::CorruptTranscript, "bad agent name in request");
    req.agent = *agent;
    req.model_id = j.value("model", "");
    for (const auto& m : j.value("messages", json::array())) {
        const auto role = role_from_string(m.value("role", ""));
        if (!role) raise(Errc::CorruptTranscript, "bad message role in request");
        req.messages.push_back({*role, m.value("content", "")});
    }
    for (const auto& t : j.value("tools", json::array()))
        if (t == "web_search") req.web_search_enabled = true;
    if (j.contains("temperature")) req.temperature = j["temperature"].get<double>();
    return req;
}

json response_to_json(const LLMResponse& response) {
    return json{{"content", response.content},
                {"input_tokens", response.input_tokens},
                {"output_tokens", response.output_tokens},
                {"web_search_calls", response.web_search_calls},
                {"latency", response.latency_s}};
}

LLMResponse response_from_json(const json& j) {
    LLMResponse r;
    r.content = j.value("content", "");
    r.input_tokens = j.value("input_tokens", std::int64_t{0});
    r.output_tokens = j.value("output_tokens", std::int64_t{0});
    r.web_search_calls = j.value("web_search_calls", 0);
    r.latency_s = j.value("latency", 0.0);
    if (r.input_tokens < 0 || r.output_tokens < 0 || r.latency_s < 0.0)
        raise(Errc::CorruptTranscript, "negative token count or latency in recording");
    return r;
}

// ---- ReplayBackend ----

ReplayBackend::ReplayBackend(const std::filesystem::path& transcript_path) {
    std::ifstream in(transcript_path);
    if (!in)
        raise(Errc::CorruptTranscript, "cannot open transcript " + transcript_path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            raise(Errc::CorruptTranscript, transcript_path.string() + ":" +
                                               std::to_string(lineno) + ": " + e.what());
        }
        if (!rec.contains("key") || !rec.contains("response"))
            raise(Errc::CorruptTranscript, transcript_path.string() + ":" +
                                               std::to_string(lineno) + ": record lacks key/response");
        const std::string key = rec["key"].get<std::string>();
        LLMResponse resp = response_from_json(rec["response"]);
        auto& q = recordings_[key];
        q.pending.push_back(resp);
        q.last = std::move(resp);
    }
}

LLMResponse ReplayBackend::complete(const LLMRequest& request) {
    const std::string key = request_key(request);
    std::lock_guard<std::mutex> lock(mu_);
    auto it = recordings_.find(key);
    if (it == recordings_.end())
        raise(Errc::ReplayMiss, "no recording for key " + key + " (agent " +
                                    to_string(request.agent) + ")");
    auto& q = it->second;
    if (q.pending.empty()) return q.last;
    LLMResponse resp = q.pending.front();
    q.pending.pop_front();
    return resp;
}

std::size_t ReplayBackend::recording_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::size_t n = 0;
    for (const auto& [key, q] : recordings_) n += std::max<std::size_t>(1, q.pending.size());
    return n;
}

// ---- RecordingBackend ----

RecordingBackend::RecordingBackend(std::shared_ptr<CompletionBackend> inner,
                                   const std::filesystem::path& transcript_path)
    : inner_(std::move(inner)), path_(transcript_path) {
    if (path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_.parent_path(), ec);
    }
}

LLMResponse RecordingBackend::complete(const LLMRequest& request) {
    LLMResponse resp = inner_->complete(request);
    json rec;
    rec["key"] = request_key(request);
    rec["request"] = request_to_json(request);
    rec["response"] = response_to_json(resp);
    std::lock_guard<std::mutex> lock(mu_);
    std::ofstream out(path_, std::ios::app);
    if (!out) raise(Errc::PersistenceFailure, "cannot append to transcript " + path_.string());
    out << rec.dump() << "\n";
    return resp;
}

// ---- PriceTable ----

PriceTable PriceTable::load_file(const std::filesystem::path& p) {
    return load_json_text(read_text_file(p));
}

PriceTable PriceTable::load_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        raise(Errc::BadOptions, std::string("price table is not valid JSON: ") + e.what());
    }
    PriceTable table;
    table.web_search_call_rate_ = doc.value("web_search_call_rate", 0.0);
    if (table.web_search_call_rate_ < 0.0)
        raise(Errc::BadOptions, "negative web_search_call_rate");
    const json models = doc.value("models", json::object());
    for (const auto& [model, rates] : models.items()) {
        const double in_per_m = rates.value("input_rate", 0.0);
        const double out_per_m = rates.value("output_rate", 0.0);
        if (in_per_m < 0.0 || out_per_m < 0.0)
            raise(Errc::BadOptions, "negative rate for model " + model);
        table.rates_[model] = ModelRates{in_per_m / 1e6, out_per_m / 1e6};
    }
    return table;
}

double PriceTable::cost(const std::string& model_id, std::int64_t input_tokens,
                        std::int64_t output_tokens, int web_search_calls) const {
    ModelRates r{};
    if (auto it = rates_.find(model_id); it != rates_.end()) r = it->second;
    return static_cast<double>(input_tokens) * r.input_per_token +
           static_cast<double>(output_tokens) * r.output_per_token +
           static_cast<double>(web_search_calls) * web_search_call_rate_;
}

// ---- TokenLedger ----

LedgerTotals TokenLedger::totals() const {
    LedgerTotals t;
    for (const auto& e : entries_) {
        t.input_tokens += e.input_tokens;
        t.output_tokens += e.output_tokens;
        t.web_search_calls += e.web_search_calls;
        t.latency_s += e.latency_s;
        t.cost += e.cost;
    }
    return t;
}

bool ledger_entries_equal(const TokenLedger& a, const TokenLedger& b) {
    const auto& ea = a.entries();
    const auto& eb = b.entries();
    if (ea.size() != eb.size()) return false;
    for (std::size_t i = 0; i < ea.size(); ++i) {
        if (ea[i].agent != eb[i].agent || ea[i].model_id != eb[i].model_id ||
            ea[i].input_tokens != eb[i].input_tokens ||
            ea[i].output_tokens != eb[i].output_tokens ||
            ea[i].web_search_calls != eb[i].web_search_calls ||
            ea[i].latency_s != eb[i].latency_s || ea[i].cost != eb[i].cost)
            return false;
    }
    return true;
}

// ---- LlmGateway ----

LlmGateway::LlmGateway(std::shared_ptr<CompletionBackend> backend, PriceTable prices,
                       std::string session_id)
    : backend_(std::move(backend)), prices_(std::move(prices)),
      own_ledger_(std::move(session_id)) {
    if (!backend_) raise(Errc::BackendUnavailable, "no completion backend configured");
}

LlmGateway::LlmGateway(std::shared_ptr<CompletionBackend> backend, PriceTable prices,
                       TokenLedger& external_ledger)
    : backend_(std::move(backend)), prices_(std::move(prices)), ledger_(&external_ledger) {
    if (!backend_) raise(Errc::BackendUnavailable, "no completion backend configured");
}

LLMResponse LlmGateway::complete(const LLMRequest& request) {
    request.validate();
    LLMResponse resp;
    for (int attempt = 0;; ++attempt) {
        try {
            resp = backend_->complete(request);
            break;
        } catch (const TransientBackendError& e) {
            if (attempt >= 1)
                raise(Errc::BackendUnavailable,
                      std::string("transport failed after retry: ") + e.what());
        }
    }
    LedgerEntry entry;
    entry.agent = request.agent;
    entry.model_id = request.model_id;
    entry.input_tokens = resp.input_tokens;
    entry.output_tokens = resp.output_tokens;
    entry.web_search_calls = resp.web_search_calls;
    entry.latency_s = resp.latency_s;
    entry.cost = prices_.cost(request.model_id, resp.input_tokens, resp.output_tokens,
                              resp.web_search_calls);
    ledger_->append(std::move(entry));
    return resp;
}

WebSearchSummary LlmGateway::web_search_summarize(const std::string& query,
                                                  const std::string& model_id, AgentName agent,
                                                  const std::string& extra_instruction) {
    LLMRequest req;
    req.agent = agent;
    req.model_id = model_id;
    req.web_search_enabled = true;
    req.temperature = 0.0;
    std::string system =
        "You research software documentation with the web_search tool and write a "
        "structured summary. Cover: a short description, an '**Initialization Function "
        "(`__init__`):**' section, a '**Parameters:**' section with one entry per "
        "constructor parameter giving **Type**, **Default** and **Description**, an "
        "'**Attributes:**' section, and usage notes. End with '**Python Dictionary of "
        "`__init__` Parameters with Default Values:**' followed by a fenced code block "
        "containing exactly one Python dict that maps every parameter name to its "
        "default value.";
    if (!extra_instruction.empty()) system += " " + extra_instruction;
    req.messages.push_back({ChatRole::system, system});
    req.messages.push_back({ChatRole::user, query});

    LLMResponse resp;
    try {
        resp = complete(req);
    } catch (const AgentError& e) {
        if (e.code() == Errc::BackendUnavailable)
            raise(Errc::SearchUnavailable, e.what());
        throw;
    }
    if (trim(resp.content).empty())
        raise(Errc::EmptyResult, "web search returned no usable documentation for: " + query);
    return WebSearchSummary{resp.content, resp.latency_s};
}

} // namespace adagent
