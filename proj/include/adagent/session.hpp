#pragma once

#include "adagent/codegen.hpp"
#include "adagent/eval_opt.hpp"
#include "adagent/gateway.hpp"
#include "adagent/memory.hpp"
#include "adagent/registry.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

namespace adagent {

enum class BackendKind { live, replay, record };

struct SessionOptions {
    bool evaluate = false;
    bool optimize = false;
    BackendKind backend = BackendKind::live;
    std::string transcript_path; // required for replay/record

    std::string cache_path = "./.ad_agent_cache.json";
    int cache_ttl_days = LongTermCache::kDefaultTtlDays;
    std::string out_dir = "./generated_scripts";
    std::string results_dir = "./results";
    std::string data_root = "./data";
    std::string interpreter = "python3";
    int max_iters = 3;
    double dry_run_timeout_s = 300.0;
    int optimizer_budget = 5;
    int n_queries = 3;

    std::string registry_path; // empty = builtin manifest
    std::string prices_path;   // empty = builtin price table
    std::string chat_model = "gpt-4o";
    std::string reasoning_model = "o4-mini";
    std::string session_id; // empty = derived from the command

    std::ostream* out = nullptr; // banners; null = std::cout
    std::ostream* err = nullptr; // diagnostics; null = std::cerr

    // test hooks
    std::shared_ptr<CompletionBackend> injected_backend; // replaces the configured kind
    ParamProposer* injected_proposer = nullptr;          // replaces the LLM proposer

    void validate() const;
};

struct SessionResult {
    int exit_code = 1;
    std::unique_ptr<SessionWorkspace> workspace;
    // instruction receipt -> last script saved; evaluation/tuning tracked
    // separately so grid timing isolates pipeline generation
    double generation_seconds = 0.0;
    double evaluation_seconds = 0.0;
};

// Builds the completion backend the options describe (or the injected one)
// and wires it to the given ledger.
std::shared_ptr<CompletionBackend> make_session_backend(const SessionOptions& options);

// The full pipeline for one command: Processor -> Selector -> Info Miner ->
// Generator/Reviewer -> optional Evaluator/Optimizer, with the stage banner
// transcript on options.out. command = nullopt reads one line from stdin
// after printing the prompt. Exit code 0 iff every selected model ends with
// a review-passing script (and, when evaluate is on, a populated report).
SessionResult run_session(std::optional<std::string> command, const SessionOptions& options);

// The "-- -- ... --" divider between stage blocks.
const std::string& stage_separator();

} // namespace adagent
