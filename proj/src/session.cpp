#include "adagent/session.hpp"

#include "adagent/errors.hpp"
#include "adagent/info_miner.hpp"
#include "adagent/selector.hpp"
#include "adagent/util.hpp"

#include <chrono>
#include <iostream>
#include <sstream>

namespace adagent {

namespace {

constexpr const char* kEnterPrompt =
    "Enter command (e.g., 'Run IForest on glass_train.mat and glass_test.mat'):";

std::string python_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += "'" + items[i] + "'";
    }
    return out + "]";
}

std::string metric_4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

const std::string& stage_separator() {
    static const std::string sep = [] {
        std::string s;
        for (int i = 0; i < 54; ++i) {
            if (i) s += " ";
            s += "--";
        }
        return s;
    }();
    return sep;
}

void SessionOptions::validate() const {
    if ((backend == BackendKind::replay || backend == BackendKind::record) &&
        transcript_path.empty() && !injected_backend)
        raise(Errc::BadOptions, "replay/record backends need --transcript");
    if (max_iters < 1) raise(Errc::BadOptions, "--max-iters must be at least 1");
    if (cache_ttl_days < 1) raise(Errc::BadOptions, "--cache-ttl-days must be at least 1");
    if (optimizer_budget < 0) raise(Errc::BadOptions, "--optimizer-budget must be >= 0");
    if (n_queries < 1) raise(Errc::BadOptions, "selector query count must be at least 1");
}

std::shared_ptr<CompletionBackend> make_session_backend(const SessionOptions& options) {
    if (options.injected_backend) {
        if (options.backend == BackendKind::record && !options.transcript_path.empty())
            return std::make_shared<RecordingBackend>(options.injected_backend,
                                                      options.transcript_path);
        return options.injected_backend;
    }
    switch (options.backend) {
        case BackendKind::live: return make_http_backend_from_env();
        case BackendKind::replay: return std::make_shared<ReplayBackend>(options.transcript_path);
        case BackendKind::record:
            return std::make_shared<RecordingBackend>(make_http_backend_from_env(),
                                                      options.transcript_path);
    }
    raise(Errc::BadOptions, "unknown backend kind");
}

namespace {

class SessionRunner {
public:
    SessionRunner(std::string command, const SessionOptions& options, bool skip_prologue = false)
        : options_(options), skip_prologue_(skip_prologue),
          out_(options.out ? *options.out : std::cout),
          err_(options.err ? *options.err : std::cerr), command_(std::move(command)),
          registry_(options.registry_path.empty() ? Registry::builtin()
                                                  : Registry::load_file(options.registry_path)),
          prices_(options.prices_path.empty() ? PriceTable::builtin()
                                              : PriceTable::load_file(options.prices_path)),
          ws_(std::make_unique<SessionWorkspace>(
              options.session_id.empty() ? "session-" + to_hex(fnv1a64(command_))
                                         : options.session_id,
              command_)),
          gateway_(make_session_backend(options), prices_, ws_->ledger()),
          cache_(LongTermCache::load(options.cache_path, options.cache_ttl_days)) {}

    SessionResult run() {
        SessionResult result;
        bool ok = false;
        try {
            ok = pipeline();
        } catch (const AgentError& e) {
            err_ << "[Error] " << stage_ << ": " << e.what() << "\n";
            ok = false;
        } catch (const std::exception& e) {
            err_ << "[Error] " << stage_ << ": " << e.what() << "\n";
            ok = false;
        }
        for (const auto& w : cache_.warnings()) err_ << "[Warning] " << w << "\n";
        result.exit_code = ok ? 0 : 1;
        result.generation_seconds = generation_seconds_;
        result.evaluation_seconds = evaluation_seconds_;
        result.workspace = std::move(ws_);
        return result;
    }

private:
    using Clock = std::chrono::steady_clock;

    bool pipeline() {
        const auto started = Clock::now();
        stage_ = "Processor";
        processor_stage();
        out_ << stage_separator() << "\n";

        stage_ = "Selector";
        selector_stage();
        out_ << stage_separator() << "\n";

        stage_ = "Info Miner";
        miner_stage();
        out_ << stage_separator() << "\n";

        stage_ = "Code Generator";
        bool all_validated = codegen_stage();
        generation_seconds_ = std::chrono::duration<double>(Clock::now() - started).count();

        if (all_validated && effective_evaluate()) {
            const auto eval_started = Clock::now();
            out_ << stage_separator() << "\n";
            stage_ = "Evaluator";
            all_validated = evaluator_stage();
            evaluation_seconds_ =
                std::chrono::duration<double>(Clock::now() - eval_started).count();
        }
        return all_validated && final_gate();
    }

    bool effective_evaluate() const {
        return options_.evaluate || ws_->config()->evaluate || effective_optimize();
    }
    bool effective_optimize() const { return options_.optimize || ws_->config()->optimize; }

    // ---- Processor ----

    void processor_stage() {
        if (!skip_prologue_) {
            out_ << "=== [Processor] Processing user input ===\n";
            out_ << kEnterPrompt << "\n";
            out_ << "User: " << command_ << "\n";
        }

        ProcessorOptions popts;
        popts.data_root = options_.data_root;
        popts.chat_model = options_.chat_model;
        ExperimentConfig config = parse_instruction(command_, &gateway_, popts);

        out_ << "Experiment Configuration:\n";
        out_ << "    Algorithm: " << python_list(config.algorithms) << "\n";
        out_ << "    Training Dataset: " << config.train_path << "\n";
        out_ << "    Testing Dataset: " << config.test_path.value_or("") << "\n";
        out_ << "    Parameters: " << param_map_python(config.user_params) << "\n";

        train_ = load_dataset(config.train_path);
        if (config.test_path) {
            test_ = load_dataset(*config.test_path);
            if (test_->evidence.format != train_.evidence.format)
                raise(Errc::DatasetMismatch, "train and test datasets use different formats");
        }
        const Modality modality =
            infer_modality(train_.evidence, &gateway_, popts, config.modality_hint);
        DatasetProfile profile =
            build_profile(train_, test_ ? &*test_ : nullptr, modality);

        ws_->set_config(config);
        ws_->set_dataset_profile(profile);
        out_ << "=== [Processor] User input processing complete\n";
    }

    // ---- Selector ----

    void selector_stage() {
        out_ << "=== [Selector] Processing user input ===\n";
        out_ << "=== [Selector] Selecting package & algorithm ===\n";
        const DatasetProfile& profile = *ws_->dataset_profile();
        const LibraryId library = select_library(registry_, profile);
        ws_->set_selected_library(library);
        out_ << "Package name: " << to_string(library) << "\n";

        const ExperimentConfig& config = *ws_->config();
        SelectionOutcome outcome;
        outcome.library = library;
        if (!config.algorithms.empty()) {
            for (const auto& name : config.algorithms) {
                const auto hit = registry_.resolve_model(name);
                if (!hit) {
                    std::string why = "'" + name + "' is not in any supported roster";
                    if (auto reason = registry_.exclusion_reason(name))
                        why += " (excluded: " + *reason + ")";
                    raise(Errc::UnknownModel, why);
                }
                if (hit->library != library)
                    raise(Errc::UnknownModel, "'" + hit->canonical + "' belongs to " +
                                                  to_string(hit->library) + ", but the dataset "
                                                  "routes to " + to_string(library));
                outcome.models.push_back(hit->canonical);
                out_ << "Algorithm: " << hit->canonical << "\n";
            }
        } else {
            SelectorOptions sopts;
            sopts.reasoning_model = options_.reasoning_model;
            sopts.n_queries = options_.n_queries;
            out_ << "Recommending a model (" << sopts.n_queries << " queries)...\n";
            outcome = recommend_model(gateway_, registry_, library, profile, sopts);
            for (const auto& vote : outcome.votes) {
                out_ << "Vote " << vote.query_index + 1 << ": "
                     << (vote.resolved ? *vote.resolved : "(unresolved) " + vote.raw_answer)
                     << "\n";
            }
            const std::string winner = plurality_winner(outcome);
            out_ << "Selected algorithm: " << winner << "\n";
            ws_->set_selection_outcome(outcome);
            ws_->set_selected_models({winner});
            out_ << "=== [Selector] Selection complete ===\n";
            return;
        }
        ws_->set_selection_outcome(outcome);
        ws_->set_selected_models(outcome.models);
        out_ << "=== [Selector] Selection complete ===\n";
    }

    // ---- Info Miner ----

    void miner_stage() {
        const LibraryId library = *ws_->selected_library();
        const TimePoint now = std::chrono::system_clock::now();
        for (const auto& model : ws_->selected_models()) {
            const CacheLookup cached = cache_.lookup(library, model, now);
            if (cached.hit()) {
                out_ << "=== [Info Miner] Found cached documentation for " << model << " ===\n";
                ws_->put_model_doc(model, *cached.doc);
                out_ << "=== [Info Miner] Documentation retrieved for " << model << " ===\n";
                continue;
            }
            out_ << "=== [Info Miner] Querying documentation for " << model << " ===\n";
            MinerOptions mopts;
            mopts.search_model = options_.chat_model;
            MinedDoc mined = get_model_info(gateway_, cache_, library, model, now, mopts);
            out_ << render_doc_summary(mined.doc);
            for (const auto& w : mined.warnings) err_ << "[Warning] " << w << "\n";
            out_ << "[Cache Updated] Stored new documentation for " << model << "\n";
            ws_->put_model_doc(model, mined.doc);
            out_ << "=== [Info Miner] Documentation retrieved for " << model << " ===\n";
        }
    }

    // ---- Generator / Reviewer ----

    bool codegen_stage() {
        const LibraryId library = *ws_->selected_library();
        bool all_ok = true;
        for (const auto& model : ws_->selected_models()) {
            CodegenInputs inputs;
            inputs.config = *ws_->config();
            inputs.profile = *ws_->dataset_profile();
            inputs.doc = ws_->model_docs().at(model);
            inputs.library = library;
            inputs.model = model;
            inputs.out_dir = options_.out_dir;
            inputs.chat_model = options_.chat_model;

            const std::uint64_t seed = fnv1a64(command_ + "|" + model);
            const SyntheticSample sample = make_synthetic_sample(inputs.profile, seed);

            DryRunOptions dopts;
            dopts.interpreter = options_.interpreter;
            dopts.timeout_s = options_.dry_run_timeout_s;

            out_ << "=== [Code Generator] Generating code for " << model << " ===\n";
            CodegenObserver observer;
            observer.on_script = [&](const GeneratedScript& script) {
                ws_->add_script_revision(model, script);
                if (script.revision > 0)
                    out_ << "=== [Code Generator] Repairing code for " << model << " (revision "
                         << script.revision << ") ===\n";
            };
            observer.on_validating = [&](int) {
                out_ << "=== [Code Reviewer] Validating for " << model << " ===\n";
            };
            observer.on_review = [&](const ReviewResult& review, int) {
                ws_->add_review(model, review);
                if (!review.passed())
                    out_ << "[Code Reviewer] Dry run failed ("
                         << to_string(review.error_category) << ")\n";
            };

            const ValidationOutcome outcome =
                generate_validated(gateway_, inputs, sample, options_.max_iters, dopts, observer);

            if (outcome.succeeded()) {
                out_ << "=== [Code Reviewer] Validation completed for " << model << " ===\n";
                out_ << "=== [Code Generator] Saved code to " << outcome.script->output_path
                     << " ===\n";
            } else if (outcome.sandbox_failed) {
                raise(Errc::SandboxFailure,
                      "dry-run sandbox could not start (interpreter '" + options_.interpreter +
                          "')");
            } else {
                out_ << "[Code Reviewer] Pipeline failed for " << model << " after "
                     << outcome.reviews.size() << " attempts\n";
                all_ok = false;
            }
        }
        return all_ok;
    }

    // ---- Evaluator / Optimizer ----

    std::optional<std::vector<int>> scored_set_labels() const {
        if (train_.data.time_series) return train_.data.time_series->test_labels;
        if (test_) {
            if (test_->data.tabular && test_->data.tabular->labels)
                return test_->data.tabular->labels;
            return std::nullopt;
        }
        if (train_.data.tabular && train_.data.tabular->labels) return train_.data.tabular->labels;
        if (train_.data.graph && train_.data.graph->labels) return train_.data.graph->labels;
        return std::nullopt;
    }

    bool evaluator_stage() {
        const LibraryId library = *ws_->selected_library();
        const PrimaryMetric objective = registry_.library(library).primary_metric;
        bool all_ok = true;

        for (const auto& model : ws_->selected_models()) {
            const GeneratedScript* script = ws_->latest_script(model);
            if (!script || !ws_->has_passing_script(model)) continue;

            EvalContext ctx;
            ctx.script = *script;
            ctx.config = *ws_->config();
            ctx.profile = *ws_->dataset_profile();
            ctx.dataset_name =
                std::filesystem::path(ws_->config()->train_path).stem().string();
            ctx.objective = objective;
            ctx.truth_labels = scored_set_labels();
            ctx.run.interpreter = options_.interpreter;
            ctx.run.results_dir = options_.results_dir;

            // the tuner's better configuration feeds the final evaluation
            std::optional<ParamMap> tuned_params;
            if (effective_optimize()) tuned_params = optimizer_stage(ctx, model);

            stage_ = "Evaluator";
            out_ << "=== [Evaluator] Running pipeline for " << model << " ===\n";
            EvaluationReport report;
            try {
                report = evaluate_pipeline(ctx, tuned_params);
            } catch (const AgentError& e) {
                if (e.code() != Errc::RuntimeFailure) throw;
                err_ << "[Error] Evaluator: " << e.what() << "\n";
                out_ << "[Evaluator] Pipeline failed on the real data for " << model << "\n";
                all_ok = false;
                continue;
            }
            if (report.auroc) out_ << "AUROC: " << metric_4(*report.auroc) << "\n";
            if (report.auprc) out_ << "AUPRC: " << metric_4(*report.auprc) << "\n";
            if (report.f1) out_ << "F1: " << metric_4(*report.f1) << "\n";
            if (!report.has_metrics())
                out_ << "No ground-truth labels; detection scores written without metrics\n";
            for (const auto& w : report.warnings) err_ << "[Warning] " << w << "\n";
            ws_->set_evaluation(model, report);
            out_ << "=== [Evaluator] Evaluation complete for " << model << " ===\n";
        }
        return all_ok;
    }

    // Runs the tuning loop; returns the winning parameter map (to be applied
    // to the final evaluation) or nullopt when tuning was skipped.
    std::optional<ParamMap> optimizer_stage(const EvalContext& ctx, const std::string& model) {
        stage_ = "Optimizer";
        out_ << "=== [Optimizer] Tuning hyperparameters for " << model << " ===\n";

        Assessment assessment;
        try {
            assessment = prepare_assessment(train_.data, ctx.config, ctx.profile,
                                            fnv1a64(command_ + "|split"));
        } catch (const AgentError& e) {
            if (e.code() != Errc::DegenerateLabels) throw;
            out_ << "[Optimizer] Skipped: no labels available for assessment\n";
            return std::nullopt;
        }

        std::unique_ptr<ParamProposer> llm_proposer;
        ParamProposer* proposer = options_.injected_proposer;
        if (!proposer) {
            llm_proposer = make_llm_proposer(gateway_, options_.chat_model);
            proposer = llm_proposer.get();
        }

        const ModelDocSummary& doc = ws_->model_docs().at(model);
        const OptimizeResult result =
            optimize(ctx, doc, assessment, *proposer, options_.optimizer_budget);
        for (const auto& trial : result.trials) ws_->add_trial(model, trial);
        for (const auto& w : result.warnings) err_ << "[Warning] " << w << "\n";

        for (const auto& trial : result.trials) {
            const std::optional<double>& metric =
                ctx.objective == PrimaryMetric::auroc ? trial.report.auroc : trial.report.f1;
            out_ << "Trial " << trial.index
                 << (trial.proposed_by == ProposedBy::initial ? " (initial)" : "") << ": "
                 << to_string(ctx.objective) << "=" << metric_4(metric.value_or(0.0)) << "\n";
        }
        out_ << "Best parameters: " << param_map_python(result.best_params) << " ("
             << to_string(ctx.objective) << " " << metric_4(result.before_metric) << " -> "
             << metric_4(result.after_metric) << ")\n";
        out_ << "=== [Optimizer] Optimization complete for " << model << " ===\n";
        return result.best_params;
    }

    bool final_gate() const {
        for (const auto& model : ws_->selected_models()) {
            if (!ws_->has_passing_script(model)) return false;
            if (effective_evaluate() && !ws_->evaluations().count(model)) return false;
        }
        return true;
    }

    const SessionOptions& options_;
    bool skip_prologue_ = false;
    std::ostream& out_;
    std::ostream& err_;
    double generation_seconds_ = 0.0;
    double evaluation_seconds_ = 0.0;
    std::string command_;
    std::string stage_ = "Main";
    Registry registry_;
    PriceTable prices_;
    std::unique_ptr<SessionWorkspace> ws_;
    LlmGateway gateway_;
    LongTermCache cache_;
    LoadedDataset train_;
    std::optional<LoadedDataset> test_;
};

} // namespace

SessionResult run_session(std::optional<std::string> command, const SessionOptions& options) {
    options.validate();
    std::ostream& out = options.out ? *options.out : std::cout;

    out << "=== [Main] Starting full pipeline ===\n";
    std::string text;
    bool prologue_printed = false;
    if (command) {
        text = *command;
    } else {
        out << "=== [Processor] Processing user input ===\n";
        out << kEnterPrompt << "\n";
        out.flush();
        if (!std::getline(std::cin, text)) text.clear();
        out << "User: " << text << "\n";
        prologue_printed = true;
    }
    SessionRunner runner(text, options, prologue_printed);
    return runner.run();
}

} // namespace adagent
