#pragma once

#include "adagent/gateway.hpp"
#include "adagent/model_doc.hpp"
#include "adagent/registry.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace adagent {

// Offline, deterministic completion source. Emulates each agent's replies
// with rule-driven content so sessions can be recorded (and then replayed)
// without network access or API keys: the processor prompt is answered by
// the pattern parser, the miner prompt by a canned documentation summary,
// and the generator prompt by a self-contained Python pipeline template.
// Fixture transcripts and offline tests are produced through this backend;
// it is not reachable from the CLI's {live, replay, record} surface except
// as record-mode input inside the fixture tools.
class RuleStubBackend : public CompletionBackend {
public:
    enum class Fault { none, missing_argument, wrong_import, data_constraint, infinite_loop };

    struct FaultSpec {
        Fault fault = Fault::none;
        bool repairable = true;
    };

    struct Options {
        // served to selector recommendation queries in order; empty = pick
        // the first roster entry from the prompt
        std::vector<std::string> recommendation_votes;
        // scripted generation faults, keyed by "MODEL" or "MODEL@<dataset-stem>"
        // (the pair key wins when both are present)
        std::map<std::string, FaultSpec> faults;
        // optimizer proposals served in order (JSON object strings)
        std::vector<std::string> optimizer_proposals;
        // modality consult answer for ambiguous CSVs
        std::string modality_answer = "time_series";
        double search_latency_pyod = 10.6;
        double search_latency_pygod = 12.0;
        double search_latency_tslib = 10.8;
    };

    RuleStubBackend() = default;
    explicit RuleStubBackend(Options options) : options_(std::move(options)) {}

    LLMResponse complete(const LLMRequest& request) override;

    // The canned documentation summary the stub's miner path emits.
    static ModelDocSummary stub_doc(LibraryId library, const std::string& model);

private:
    LLMResponse respond(const LLMRequest& request, std::string content, double latency);

    Options options_;
    std::mutex mu_;
    std::size_t vote_cursor_ = 0;
    std::size_t proposal_cursor_ = 0;
};

// The self-contained Python pipeline the stub generator writes. Exposed for
// the fixture tools; fault != none plants the corresponding failure.
std::string stub_pipeline_script(const std::string& model, LibraryId library,
                                 const std::string& train_path,
                                 const std::optional<std::string>& test_path,
                                 const std::string& params_json,
                                 RuleStubBackend::Fault fault);

} // namespace adagent
