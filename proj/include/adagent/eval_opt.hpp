#pragma once

#include "adagent/codegen_types.hpp"
#include "adagent/eval_types.hpp"
#include "adagent/gateway.hpp"
#include "adagent/metrics.hpp"
#include "adagent/model_doc.hpp"
#include "adagent/processor.hpp"
#include "adagent/util.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace adagent {

struct PipelineRunOptions {
    std::string interpreter = "python3";
    double timeout_s = 600.0;
    std::string results_dir = "./results";
    std::filesystem::path working_dir; // empty = current directory
};

struct PipelineRunResult {
    std::vector<double> scores;
    std::vector<int> labels_pred;
    double wall_time_s = 0.0;
};

// Executes the validated script against the real data (optionally with
// dataset/params overrides) and parses its result file. Any failure -
// nonzero exit, timeout, missing or malformed result - raises
// RuntimeFailure with the stderr tail.
PipelineRunResult run_pipeline(const GeneratedScript& script, const PipelineRunOptions& options,
                               const std::optional<std::string>& data_override = {},
                               const std::optional<std::string>& test_override = {},
                               const std::optional<ParamMap>& params_override = {});

struct EvalContext {
    GeneratedScript script;
    ExperimentConfig config;
    DatasetProfile profile;
    std::string dataset_name;
    PrimaryMetric objective = PrimaryMetric::auroc;
    std::optional<std::vector<int>> truth_labels; // ground truth of the scored set
    PipelineRunOptions run;
};

// Runs the pipeline on the real data, computes AUROC/AUPRC/F1 when labels
// exist, and writes <results_dir>/<MODEL>_<dataset>_report.json. Degenerate
// labels demote metrics to warnings instead of failing the evaluation.
EvaluationReport evaluate_pipeline(const EvalContext& ctx,
                                   const std::optional<ParamMap>& params_override = {});

// ----------------------------------------------------------------- tuning

class ParamProposer {
public:
    virtual ~ParamProposer() = default;
    // nullopt = this trial's proposal was unusable (budget still consumed)
    virtual std::optional<ParamMap> propose(const std::vector<OptimizationTrial>& history,
                                            const ModelDocSummary& doc, int trial_index) = 0;
    virtual ProposedBy kind() const = 0;
};

// Asks the optimizer agent for the next parameter map, constrained to the
// documented constructor names; one re-ask on an unparseable reply.
std::unique_ptr<ParamProposer> make_llm_proposer(LlmGateway& gateway, std::string chat_model);

// How the tuning loop scores each trial. Split mode fits on a carved
// training subset and scores a held-out validation fraction; direct mode
// assesses on the final evaluation set itself (with an overfitting warning).
struct Assessment {
    std::optional<std::string> data_override;
    std::optional<std::string> test_override;
    std::vector<int> labels; // truth for the assessed set
    bool direct = false;
    std::shared_ptr<TempDir> staging; // owns the split files
    std::vector<std::string> warnings;
};

// Builds the assessment for the tuning loop: an 80/20 seeded split of labeled
// tabular training data when a labeled test set exists, otherwise direct
// assessment on the labeled set at hand.
Assessment prepare_assessment(const Dataset& train_data, const ExperimentConfig& config,
                              const DatasetProfile& profile, std::uint64_t seed);

struct OptimizeResult {
    ParamMap best_params;
    int best_index = 0;
    std::vector<OptimizationTrial> trials;
    std::vector<std::string> warnings;

    double before_metric = 0.0;
    double after_metric = 0.0;
};

// Trial 0 re-runs the current parameters; each following trial runs one
// proposal. Returns the argmax-metric parameters, falling back to trial 0
// when nothing improves. Writes <results_dir>/<MODEL>_<dataset>_trials.json.
OptimizeResult optimize(const EvalContext& ctx, const ModelDocSummary& doc,
                        const Assessment& assessment, ParamProposer& proposer, int budget);

} // namespace adagent
