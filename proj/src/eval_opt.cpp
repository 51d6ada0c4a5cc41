#include "adagent/eval_opt.hpp"

#include "adagent/errors.hpp"
#include "adagent/subprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace adagent {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(ProposedBy p) {
    switch (p) {
        case ProposedBy::initial: return "initial";
        case ProposedBy::llm: return "llm";
        case ProposedBy::stub: return "stub";
    }
    return "?";
}

json EvaluationReport::to_json() const {
    json j;
    j["model"] = model;
    j["dataset"] = dataset;
    if (auroc) j["auroc"] = *auroc;
    if (auprc) j["auprc"] = *auprc;
    if (f1) j["f1"] = *f1;
    j["n_test"] = n_test;
    j["params"] = param_map_to_json(params);
    j["wall_time_s"] = wall_time_s;
    if (!warnings.empty()) j["warnings"] = warnings;
    return j;
}

PipelineRunResult run_pipeline(const GeneratedScript& script, const PipelineRunOptions& options,
                               const std::optional<std::string>& data_override,
                               const std::optional<std::string>& test_override,
                               const std::optional<ParamMap>& params_override) {
    TempDir scratch("adagent-run");
    const fs::path script_path = scratch.path() / (script.model + "_run.py");
    write_text_file(script_path, script.source_text);
    const fs::path result_path = scratch.path() / "result.json";

    ProcessSpec spec;
    spec.argv = split_command(options.interpreter);
    spec.argv.push_back(script_path.string());
    spec.working_dir = options.working_dir;
    spec.extra_env.emplace_back("AD_AGENT_RESULT_PATH", result_path.string());
    if (data_override) spec.extra_env.emplace_back("AD_AGENT_DATA_OVERRIDE", *data_override);
    if (test_override) spec.extra_env.emplace_back("AD_AGENT_TEST_OVERRIDE", *test_override);
    if (params_override)
        spec.extra_env.emplace_back("AD_AGENT_PARAMS_OVERRIDE",
                                    param_map_to_json(*params_override).dump());
    spec.timeout_s = options.timeout_s;

    const ProcessResult run = run_process(spec);
    if (run.spawn_failed)
        raise(Errc::SandboxFailure, "could not launch interpreter: " + run.spawn_error);
    if (run.timed_out)
        raise(Errc::RuntimeFailure, "pipeline exceeded " + format_double(options.timeout_s) + " s");
    if (run.exit_code != 0 || run.signaled) {
        std::string tail = run.stderr_text;
        if (tail.size() > 800) tail = "..." + tail.substr(tail.size() - 800);
        raise(Errc::RuntimeFailure, "pipeline exited with " + std::to_string(run.exit_code) +
                                        (tail.empty() ? "" : ": " + tail));
    }
    if (!fs::exists(result_path))
        raise(Errc::RuntimeFailure, "malformed_output: pipeline exited 0 but wrote no result file");

    PipelineRunResult out;
    out.wall_time_s = run.duration_s;
    try {
        const json result = json::parse(read_text_file(result_path));
        for (const auto& s : result.at("scores")) out.scores.push_back(s.get<double>());
        for (const auto& l : result.value("labels_pred", json::array()))
            out.labels_pred.push_back(l.get<int>());
    } catch (const json::exception& e) {
        raise(Errc::RuntimeFailure, std::string("malformed_output: ") + e.what());
    }
    if (out.scores.empty()) raise(Errc::RuntimeFailure, "malformed_output: empty scores array");
    return out;
}

namespace {

double training_anomaly_rate(const DatasetProfile& profile) {
    if (profile.label_prevalence) return *profile.label_prevalence;
    return 0.1;
}

EvaluationReport report_from_run(const EvalContext& ctx, const PipelineRunResult& run,
                                 const std::optional<std::vector<int>>& labels,
                                 const ParamMap& effective_params) {
    EvaluationReport report;
    report.model = ctx.script.model;
    report.dataset = ctx.dataset_name;
    report.n_test = run.scores.size();
    report.params = effective_params;
    report.wall_time_s = run.wall_time_s;

    if (labels && labels->size() == run.scores.size()) {
        try {
            report.auroc = compute_auroc(run.scores, *labels);
            report.auprc = compute_auprc(run.scores, *labels);
            ThresholdRule rule;
            rule.anomaly_rate = training_anomaly_rate(ctx.profile);
            report.f1 = compute_f1(run.scores, *labels, rule);
        } catch (const AgentError& e) {
            if (e.code() != Errc::DegenerateLabels) throw;
            report.auroc.reset();
            report.auprc.reset();
            report.f1.reset();
            report.warnings.push_back(std::string("metrics unavailable: ") + e.what());
        }
        if (report.auroc && *report.auroc < 0.5)
            report.warnings.push_back(
                "AUROC below 0.5; the score orientation may be inverted");
    } else if (labels) {
        report.warnings.push_back("label count does not match the scored set; metrics skipped");
    }
    return report;
}

double objective_of(const EvaluationReport& report, PrimaryMetric objective, bool* missing) {
    const std::optional<double>& m =
        objective == PrimaryMetric::auroc ? report.auroc : report.f1;
    if (!m) {
        if (missing) *missing = true;
        return -1.0;
    }
    return *m;
}

} // namespace

EvaluationReport evaluate_pipeline(const EvalContext& ctx,
                                   const std::optional<ParamMap>& params_override) {
    const PipelineRunResult run =
        run_pipeline(ctx.script, ctx.run, std::nullopt, std::nullopt, params_override);
    ParamMap effective = ctx.script.params_used;
    if (params_override)
        for (const auto& [k, v] : *params_override) effective[k] = v;
    EvaluationReport report = report_from_run(ctx, run, ctx.truth_labels, effective);

    const fs::path out = fs::path(ctx.run.results_dir) /
                         (ctx.script.model + "_" + ctx.dataset_name + "_report.json");
    write_text_file(out, report.to_json().dump(2) + "\n");
    return report;
}

// ------------------------------------------------------------------ tuning

namespace {

class LlmParamProposer final : public ParamProposer {
public:
    LlmParamProposer(LlmGateway& gateway, std::string chat_model)
        : gateway_(gateway), chat_model_(std::move(chat_model)) {}

    std::optional<ParamMap> propose(const std::vector<OptimizationTrial>& history,
                                    const ModelDocSummary& doc, int trial_index) override {
        LLMRequest req;
        req.agent = AgentName::optimizer;
        req.model_id = chat_model_;
        req.temperature = 0.0;
        req.messages.push_back(
            {ChatRole::system,
             "You tune anomaly-detection hyperparameters. Given the documented constructor "
             "parameters and the trial history, reply with one JSON object mapping parameter "
             "names to new values. Use only documented names. JSON only."});
        std::ostringstream user;
        user << "Trial " << trial_index << ". Documented parameters:\n";
        for (const auto& p : doc.init_params) {
            user << "  " << p.name << " (" << (p.type_text.empty() ? "unspecified" : p.type_text)
                 << ")";
            if (p.default_value) user << " default " << p.default_value->python_literal();
            user << "\n";
        }
        user << "History (params -> metrics):\n";
        for (const auto& t : history) {
            user << "  " << param_map_to_json(t.params).dump() << " ->";
            if (t.report.auroc) user << " auroc=" << format_double(*t.report.auroc);
            if (t.report.auprc) user << " auprc=" << format_double(*t.report.auprc);
            if (t.report.f1) user << " f1=" << format_double(*t.report.f1);
            user << "\n";
        }
        req.messages.push_back({ChatRole::user, user.str()});

        for (int attempt = 0; attempt < 2; ++attempt) {
            std::string content;
            try {
                content = gateway_.complete(req).content;
            } catch (const AgentError&) {
                return std::nullopt;
            }
            if (auto parsed = parse_params(content, doc)) return parsed;
            req.messages.push_back({ChatRole::assistant, content});
            req.messages.push_back(
                {ChatRole::user, "That was not a parseable JSON object of documented "
                                 "parameters. Reply with the JSON object only."});
        }
        return std::nullopt;
    }

    ProposedBy kind() const override { return ProposedBy::llm; }

private:
    static std::optional<ParamMap> parse_params(const std::string& content,
                                                const ModelDocSummary& doc) {
        const auto brace = content.find('{');
        const auto close = content.rfind('}');
        if (brace == std::string::npos || close == std::string::npos || close < brace)
            return std::nullopt;
        json j;
        try {
            j = json::parse(content.substr(brace, close - brace + 1));
        } catch (const json::exception&) {
            return std::nullopt;
        }
        if (!j.is_object()) return std::nullopt;
        ParamMap all = param_map_from_json(j);
        ParamMap kept;
        for (const auto& [k, v] : all) {
            const bool documented = std::any_of(doc.init_params.begin(), doc.init_params.end(),
                                                [&](const ParamSpec& p) { return p.name == k; });
            if (documented) kept[k] = v;
        }
        if (kept.empty()) return std::nullopt;
        return kept;
    }

    LlmGateway& gateway_;
    std::string chat_model_;
};

std::vector<int> labels_subset(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(labels[i]);
    return out;
}

Matrix rows_subset(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out;
    out.rows = idx.size();
    out.cols = m.cols;
    out.values.reserve(out.rows * out.cols);
    for (auto i : idx)
        for (std::size_t c = 0; c < m.cols; ++c) out.values.push_back(m.at(i, c));
    return out;
}

} // namespace

std::unique_ptr<ParamProposer> make_llm_proposer(LlmGateway& gateway, std::string chat_model) {
    return std::make_unique<LlmParamProposer>(gateway, std::move(chat_model));
}

Assessment prepare_assessment(const Dataset& train_data, const ExperimentConfig& config,
                              const DatasetProfile& profile, std::uint64_t seed) {
    Assessment a;

    const bool tabular_split_possible = train_data.tabular.has_value() &&
                                        train_data.tabular->labels.has_value() &&
                                        config.test_path && profile.test_has_labels;
    if (tabular_split_possible) {
        const TabularData& t = *train_data.tabular;
        std::vector<std::size_t> idx(t.x.rows);
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(seed);
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.next_index(i)]);
        const std::size_t val_count = std::max<std::size_t>(1, idx.size() / 5);
        std::vector<std::size_t> val_idx(idx.begin(), idx.begin() + val_count);
        std::vector<std::size_t> fit_idx(idx.begin() + val_count, idx.end());

        // a split is only assessable when both classes land in the carve-out
        const std::vector<int> val_labels = labels_subset(*t.labels, val_idx);
        const bool both_classes =
            std::count(val_labels.begin(), val_labels.end(), 1) > 0 &&
            std::count(val_labels.begin(), val_labels.end(), 0) > 0;
        if (both_classes && fit_idx.size() >= 2) {
            a.staging = std::make_shared<TempDir>("adagent-split");
            Dataset fit, val;
            fit.format = train_data.format;
            val.format = train_data.format;
            fit.tabular = TabularData{rows_subset(t.x, fit_idx),
                                      labels_subset(*t.labels, fit_idx), t.column_names};
            val.tabular = TabularData{rows_subset(t.x, val_idx), val_labels, t.column_names};
            const std::string ext = train_data.format == DataFormat::csv   ? ".csv"
                                    : train_data.format == DataFormat::npz ? ".npz"
                                                                           : ".mat";
            const fs::path fit_path = a.staging->path() / ("fit" + ext);
            const fs::path val_path = a.staging->path() / ("val" + ext);
            write_dataset_as(fit_path, fit);
            write_dataset_as(val_path, val);
            a.data_override = fit_path.string();
            a.test_override = val_path.string();
            a.labels = val_labels;
            return a;
        }
        a.warnings.push_back("validation carve-out was single-class; assessing directly");
    }

    // direct assessment on whichever set carries labels
    a.direct = true;
    if (train_data.time_series) {
        a.labels = train_data.time_series->test_labels;
        a.warnings.push_back("tuning assesses on the labeled test series directly");
    } else if (train_data.graph && train_data.graph->labels) {
        a.labels = *train_data.graph->labels;
        a.warnings.push_back("tuning assesses on the labeled graph directly");
    } else if (train_data.tabular && train_data.tabular->labels && !config.test_path) {
        a.labels = *train_data.tabular->labels;
        a.warnings.push_back(
            "single labeled dataset: tuning assesses on it directly and may overfit");
    } else {
        raise(Errc::DegenerateLabels, "no labels available for optimizer assessment");
    }
    return a;
}

OptimizeResult optimize(const EvalContext& ctx, const ModelDocSummary& doc,
                        const Assessment& assessment, ParamProposer& proposer, int budget) {
    if (budget < 0) raise(Errc::BadOptions, "optimizer budget must be >= 0");
    OptimizeResult result;
    result.warnings = assessment.warnings;

    EvalContext assess_ctx = ctx;
    assess_ctx.truth_labels = assessment.labels;

    auto run_trial = [&](const std::optional<ParamMap>& override_params) {
        const PipelineRunResult run = run_pipeline(
            ctx.script, ctx.run, assessment.data_override, assessment.test_override,
            override_params);
        ParamMap effective = ctx.script.params_used;
        if (override_params)
            for (const auto& [k, v] : *override_params) effective[k] = v;
        return report_from_run(assess_ctx, run, assessment.labels, effective);
    };

    // trial 0: the pipeline's current configuration ("before")
    OptimizationTrial initial;
    initial.index = 0;
    initial.params = ctx.script.params_used;
    initial.report = run_trial(std::nullopt);
    initial.proposed_by = ProposedBy::initial;
    result.trials.push_back(std::move(initial));

    for (int k = 1; k <= budget; ++k) {
        const auto proposal = proposer.propose(result.trials, doc, k);
        if (!proposal) {
            result.warnings.push_back("trial " + std::to_string(k) +
                                      " skipped: proposal was unusable");
            continue;
        }
        OptimizationTrial trial;
        trial.index = static_cast<int>(result.trials.size());
        trial.proposed_by = proposer.kind();
        try {
            trial.report = run_trial(proposal);
        } catch (const AgentError& e) {
            if (e.code() != Errc::RuntimeFailure) throw;
            result.warnings.push_back("trial " + std::to_string(k) + " failed: " + e.what());
            continue;
        }
        trial.params = ctx.script.params_used;
        for (const auto& [key, v] : *proposal) trial.params[key] = v;
        result.trials.push_back(std::move(trial));
    }

    // argmax with trial-0 fallback; equal metrics keep the earlier trial
    int best = 0;
    bool missing = false;
    double best_metric = objective_of(result.trials[0].report, ctx.objective, &missing);
    for (std::size_t i = 1; i < result.trials.size(); ++i) {
        bool trial_missing = false;
        const double m = objective_of(result.trials[i].report, ctx.objective, &trial_missing);
        if (!trial_missing && m > best_metric) {
            best = static_cast<int>(i);
            best_metric = m;
        }
    }
    result.best_index = best;
    result.best_params = result.trials[static_cast<std::size_t>(best)].params;
    result.before_metric = objective_of(result.trials[0].report, ctx.objective, nullptr);
    result.after_metric = best_metric;

    json trials_json = json::array();
    for (const auto& t : result.trials) {
        trials_json.push_back({{"index", t.index},
                               {"proposed_by", to_string(t.proposed_by)},
                               {"params", param_map_to_json(t.params)},
                               {"report", t.report.to_json()}});
    }
    json doc_out;
    doc_out["model"] = ctx.script.model;
    doc_out["dataset"] = ctx.dataset_name;
    doc_out["objective"] = to_string(ctx.objective);
    doc_out["best_index"] = result.best_index;
    doc_out["before"] = result.before_metric;
    doc_out["after"] = result.after_metric;
    doc_out["trials"] = std::move(trials_json);
    if (!result.warnings.empty()) doc_out["warnings"] = result.warnings;
    const fs::path out = fs::path(ctx.run.results_dir) /
                         (ctx.script.model + "_" + ctx.dataset_name + "_trials.json");
    write_text_file(out, doc_out.dump(2) + "\n");
    return result;
}

} // namespace adagent
