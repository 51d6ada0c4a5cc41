#pragma once

#include "adagent/codegen_types.hpp"
#include "adagent/gateway.hpp"
#include "adagent/model_doc.hpp"
#include "adagent/processor.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace adagent {

struct CodegenInputs {
    ExperimentConfig config;
    DatasetProfile profile;
    ModelDocSummary doc;
    LibraryId library{};
    std::string model;
    std::string out_dir = "./generated_scripts";
    std::string chat_model = "gpt-4o";
};

struct DryRunOptions {
    std::string interpreter = "python3";
    double timeout_s = 300.0;
};

// "<out_dir>/<MODEL>_<dataset-stem>.py"
std::string script_output_path(const std::string& out_dir, const std::string& model,
                               const std::string& train_path);

// Deterministic miniature dataset matching the profile's shape: same feature
// width, both label classes when the profile is labeled, <= 32 rows.
SyntheticSample make_synthetic_sample(const DatasetProfile& profile, std::uint64_t seed);

// Asks the generator agent for the pipeline script (revision 0). params_used
// is the doc defaults overridden by the user's constraints.
GeneratedScript generate_script(LlmGateway& gateway, const CodegenInputs& inputs);

// Executes the script in a fresh temp sandbox against the staged sample,
// classifies any failure by stderr pattern, and verifies the result file on
// success. Raises SandboxFailure when the interpreter cannot be launched.
ReviewResult dry_run(const GeneratedScript& script, const SyntheticSample& sample,
                     const DryRunOptions& options);

// One LLM-written repair hint for a failing review.
std::string reviewer_hint(LlmGateway& gateway, const CodegenInputs& inputs,
                          const GeneratedScript& script, const ReviewResult& review);

// Regenerates the script from the failing source, stderr and the doc's
// constructor signature. Revision increments by one.
GeneratedScript repair(LlmGateway& gateway, const CodegenInputs& inputs,
                       const GeneratedScript& script, const ReviewResult& review);

struct ValidationOutcome {
    std::optional<GeneratedScript> script; // engaged on success
    std::vector<ReviewResult> reviews;     // one per dry run
    bool sandbox_failed = false;

    bool succeeded() const { return script.has_value(); }
};

// Progress hooks for banner printing and workspace bookkeeping.
struct CodegenObserver {
    std::function<void(const GeneratedScript&)> on_script;           // generation + repairs
    std::function<void(int revision)> on_validating;                 // before each dry run
    std::function<void(const ReviewResult&, int revision)> on_review;
};

// generate -> dry-run -> repair until a pass or the iteration budget is
// spent. On success the passing script is written to its output path.
ValidationOutcome generate_validated(LlmGateway& gateway, const CodegenInputs& inputs,
                                     const SyntheticSample& sample, int max_iters,
                                     const DryRunOptions& options,
                                     const CodegenObserver& observer = {});

} // namespace adagent
