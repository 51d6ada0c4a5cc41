#include "adagent/codegen.hpp"

#include "adagent/errors.hpp"
#include "adagent/info_miner.hpp"
#include "adagent/subprocess.hpp"
#include "adagent/util.hpp"

#include <algorithm>
#include <sstream>

namespace adagent {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::none: return "none";
        case ErrorCategory::import_error: return "import_error";
        case ErrorCategory::missing_or_bad_argument: return "missing_or_bad_argument";
        case ErrorCategory::runtime_error: return "runtime_error";
        case ErrorCategory::data_constraint_violation: return "data_constraint_violation";
        case ErrorCategory::timeout: return "timeout";
    }
    return "?";
}

std::string script_output_path(const std::string& out_dir, const std::string& model,
                               const std::string& train_path) {
    fs::path p(train_path);
    std::string stem = p.stem().string();
    if (stem.empty()) stem = "dataset";
    std::string dir = out_dir.empty() ? std::string(".") : out_dir;
    while (dir.size() > 1 && dir.back() == '/') dir.pop_back();
    return dir + "/" + model + "_" + stem + ".py";
}

// ----------------------------------------------------------------- samples

SyntheticSample make_synthetic_sample(const DatasetProfile& profile, std::uint64_t seed) {
    Rng rng(seed);
    SyntheticSample sample;
    sample.seed = seed;

    auto fill = [&rng](Matrix& m, std::size_t rows, std::size_t cols) {
        m.rows = rows;
        m.cols = cols;
        m.values.resize(rows * cols);
        for (auto& v : m.values) v = rng.next_gaussian();
    };

    switch (profile.modality) {
        case Modality::graph: {
            GraphData g;
            const std::size_t nodes = 12, n_edges = 24;
            fill(g.node_features, nodes, std::max<std::size_t>(1, profile.n_features));
            for (std::size_t i = 0; i < n_edges; ++i) {
                const auto u = static_cast<std::int64_t>(rng.next_index(nodes));
                const auto v = static_cast<std::int64_t>(rng.next_index(nodes));
                g.edges.emplace_back(u, v);
            }
            if (profile.has_labels) {
                std::vector<int> labels(nodes, 0);
                labels[3] = 1;
                labels[9] = 1;
                g.labels = std::move(labels);
            }
            sample.data.format = DataFormat::graph_bundle;
            sample.data.graph = std::move(g);
            break;
        }
        case Modality::time_series: {
            TimeSeriesData ts;
            const std::size_t channels = std::max<std::size_t>(1, profile.n_features);
            fill(ts.train, 48, channels);
            fill(ts.test, 32, channels);
            ts.test_labels.assign(32, 0);
            for (std::size_t i = 12; i < 16; ++i) {
                ts.test_labels[i] = 1;
                for (std::size_t c = 0; c < channels; ++c) ts.test.at(i, c) += 4.0;
            }
            sample.data.format = DataFormat::ts_bundle;
            sample.data.time_series = std::move(ts);
            break;
        }
        case Modality::multivariate: {
            TabularData t;
            const std::size_t rows = 16;
            const std::size_t cols = std::max<std::size_t>(1, profile.n_features);
            fill(t.x, rows, cols);
            if (profile.has_labels) {
                std::vector<int> labels(rows, 0);
                for (std::size_t r : {5ul, 11ul, 15ul}) {
                    labels[r] = 1;
                    for (std::size_t c = 0; c < cols; ++c) t.x.at(r, c) += 3.0;
                }
                t.labels = std::move(labels);
            }
            sample.data.format = profile.format == DataFormat::graph_bundle ||
                                         profile.format == DataFormat::ts_bundle
                                     ? DataFormat::mat
                                     : profile.format;
            sample.data.tabular = std::move(t);
            break;
        }
    }
    return sample;
}

// ----------------------------------------------------------------- prompts

namespace {

constexpr const char* kGeneratorContract =
    "You write one complete, runnable Python anomaly-detection pipeline script. "
    "Requirements: "
    "(1) the script starts from a loader preamble that reads the environment overrides "
    "AD_AGENT_DATA_OVERRIDE (replaces the training data path, and the scored data path "
    "when no test override exists), AD_AGENT_TEST_OVERRIDE (replaces the scored data "
    "path), AD_AGENT_RESULT_PATH (where the result JSON goes) and "
    "AD_AGENT_PARAMS_OVERRIDE (a JSON object merged over the hyperparameters); "
    "(2) the model is constructed with the documented defaults overridden by the user "
    "parameters; "
    "(3) the script fits on the training data, scores the test data when a test path is "
    "configured and the training data otherwise, and writes a JSON object "
    "{\"scores\": [...], \"labels_pred\": [...]} to the result path; "
    "(4) reply with the Python source only.";

std::string strip_code_fences(const std::string& content) {
    std::string body = trim(content);
    if (body.rfind("```", 0) != 0) return body;
    const auto first_nl = body.find('\n');
    if (first_nl == std::string::npos) return body;
    const auto last_fence = body.rfind("```");
    if (last_fence <= first_nl) return body;
    return trim(body.substr(first_nl + 1, last_fence - first_nl - 1));
}

std::string generation_user_prompt(const CodegenInputs& inputs, const ParamMap& params) {
    std::ostringstream out;
    out << "Model: " << inputs.model << "\n";
    out << "Library: " << to_string(inputs.library) << "\n";
    out << "Training data: " << inputs.config.train_path << "\n";
    if (inputs.config.test_path) out << "Test data: " << *inputs.config.test_path << "\n";
    out << "Modality: " << to_string(inputs.profile.modality) << "\n";
    out << "Feature count: " << inputs.profile.n_features << "\n";
    out << "Constructor parameters (defaults after user overrides): "
        << param_map_to_json(params).dump() << "\n";
    out << "Result file: "
        << "./results/" << inputs.model << "_" << fs::path(inputs.config.train_path).stem().string()
        << "_result.json" << "\n\n";
    out << "Documentation:\n" << render_doc_summary(inputs.doc);
    return out.str();
}

ParamMap merged_params(const CodegenInputs& inputs) {
    ParamMap params = inputs.doc.default_params();
    for (const auto& [k, v] : inputs.config.user_params) params[k] = v;
    return params;
}

void validate_params_used(const CodegenInputs& inputs, const ParamMap& params) {
    for (const auto& [name, value] : params) {
        const bool documented =
            std::any_of(inputs.doc.init_params.begin(), inputs.doc.init_params.end(),
                        [&](const ParamSpec& p) { return p.name == name; });
        if (!documented && !inputs.config.user_params.count(name))
            raise(Errc::TypeMismatch,
                  "parameter '" + name + "' is neither documented nor user-specified");
    }
}

} // namespace

GeneratedScript generate_script(LlmGateway& gateway, const CodegenInputs& inputs) {
    const ParamMap params = merged_params(inputs);
    validate_params_used(inputs, params);

    LLMRequest req;
    req.agent = AgentName::generator;
    req.model_id = inputs.chat_model;
    req.temperature = 0.0;
    req.messages.push_back({ChatRole::system, kGeneratorContract});
    req.messages.push_back({ChatRole::user, generation_user_prompt(inputs, params)});

    LLMResponse resp;
    try {
        resp = gateway.complete(req);
    } catch (const AgentError& e) {
        if (e.code() == Errc::BackendUnavailable)
            raise(Errc::PromptBudgetExceeded, std::string("generation failed: ") + e.what());
        throw;
    }

    GeneratedScript script;
    script.model = inputs.model;
    script.library = inputs.library;
    script.source_text = strip_code_fences(resp.content);
    script.output_path = script_output_path(inputs.out_dir, inputs.model, inputs.config.train_path);
    script.revision = 0;
    script.params_used = params;
    return script;
}

// ------------------------------------------------------------------ review

namespace {

ErrorCategory classify_stderr(const std::string& stderr_text) {
    if (stderr_text.find("ModuleNotFoundError") != std::string::npos ||
        stderr_text.find("ImportError") != std::string::npos)
        return ErrorCategory::import_error;
    if (stderr_text.find("TypeError") != std::string::npos)
        return ErrorCategory::missing_or_bad_argument;
    if (stderr_text.find("ValueError") != std::string::npos ||
        stderr_text.find("AssertionError") != std::string::npos)
        return ErrorCategory::data_constraint_violation;
    return ErrorCategory::runtime_error;
}

std::string tail_of(const std::string& text, std::size_t max_len = 800) {
    if (text.size() <= max_len) return text;
    return "..." + text.substr(text.size() - max_len);
}

// Tracebacks embed the per-run sandbox directory; scrub it so reviews (and
// the repair prompts built from them) are reproducible across replays.
std::string scrub_sandbox_paths(std::string text, const std::string& sandbox) {
    std::size_t at = 0;
    while ((at = text.find(sandbox, at)) != std::string::npos)
        text.replace(at, sandbox.size(), "<sandbox>");
    return text;
}

std::string stage_sample(const fs::path& sandbox, const SyntheticSample& sample) {
    fs::path target;
    switch (sample.data.format) {
        case DataFormat::mat: target = sandbox / "sample.mat"; break;
        case DataFormat::csv: target = sandbox / "sample.csv"; break;
        case DataFormat::npz: target = sandbox / "sample.npz"; break;
        case DataFormat::graph_bundle: target = sandbox / "sample.npz"; break;
        case DataFormat::ts_bundle: target = sandbox / "sample_bundle"; break;
    }
    write_dataset_as(target, sample.data);
    return target.string();
}

} // namespace

ReviewResult dry_run(const GeneratedScript& script, const SyntheticSample& sample,
                     const DryRunOptions& options) {
    TempDir sandbox("adagent-dryrun");
    const fs::path script_path = sandbox.path() / (script.model + "_dryrun.py");
    write_text_file(script_path, script.source_text);
    const std::string sample_path = stage_sample(sandbox.path(), sample);
    const fs::path result_path = sandbox.path() / "result.json";

    ProcessSpec spec;
    spec.argv = split_command(options.interpreter);
    spec.argv.push_back(script_path.string());
    spec.working_dir = sandbox.path();
    spec.extra_env = {{"AD_AGENT_DATA_OVERRIDE", sample_path},
                      {"AD_AGENT_RESULT_PATH", result_path.string()}};
    spec.timeout_s = options.timeout_s;

    const ProcessResult run = run_process(spec);
    if (run.spawn_failed)
        raise(Errc::SandboxFailure, "could not launch interpreter: " + run.spawn_error);

    ReviewResult review;
    review.duration_s = run.duration_s;

    if (run.timed_out) {
        review.verdict = ReviewVerdict::fail;
        review.error_category = ErrorCategory::timeout;
        review.stderr_excerpt = "dry run exceeded " + format_double(options.timeout_s) + " s";
        return review;
    }
    if (run.exit_code != 0 || run.signaled) {
        review.verdict = ReviewVerdict::fail;
        review.error_category = classify_stderr(run.stderr_text);
        review.stderr_excerpt =
            scrub_sandbox_paths(tail_of(run.stderr_text), sandbox.path().string());
        if (review.stderr_excerpt.empty())
            review.stderr_excerpt = "exit code " + std::to_string(run.exit_code);
        return review;
    }

    // passing runs must have produced a parseable result file
    if (!fs::exists(result_path)) {
        review.verdict = ReviewVerdict::fail;
        review.error_category = ErrorCategory::runtime_error;
        review.stderr_excerpt = "script exited 0 but wrote no result file";
        return review;
    }
    try {
        const json result = json::parse(read_text_file(result_path));
        if (!result.contains("scores") || !result["scores"].is_array())
            throw std::runtime_error("result file lacks a scores array");
    } catch (const std::exception& e) {
        review.verdict = ReviewVerdict::fail;
        review.error_category = ErrorCategory::runtime_error;
        review.stderr_excerpt = std::string("malformed result file: ") + e.what();
        return review;
    }

    review.verdict = ReviewVerdict::pass;
    review.error_category = ErrorCategory::none;
    return review;
}

std::string reviewer_hint(LlmGateway& gateway, const CodegenInputs& inputs,
                          const GeneratedScript& script, const ReviewResult& review) {
    LLMRequest req;
    req.agent = AgentName::reviewer;
    req.model_id = inputs.chat_model;
    req.temperature = 0.0;
    req.messages.push_back(
        {ChatRole::system,
         "You review a failing anomaly-detection script and reply with one short repair "
         "instruction for the generator. No code."});
    std::ostringstream user;
    user << "Model: " << inputs.model << " (" << to_string(inputs.library) << ")\n";
    user << "Failure category: " << to_string(review.error_category) << "\n";
    user << "Stderr:\n" << review.stderr_excerpt << "\n\n";
    user << "Constructor signature:\n";
    for (const auto& p : inputs.doc.init_params) {
        user << "  " << p.name;
        if (p.default_value) user << " = " << p.default_value->python_literal();
        user << "\n";
    }
    req.messages.push_back({ChatRole::user, user.str()});
    try {
        return trim(gateway.complete(req).content);
    } catch (const AgentError& e) {
        if (e.code() == Errc::BackendUnavailable || e.code() == Errc::ReplayMiss)
            return ""; // the repair prompt still carries stderr and the signature
        throw;
    }
}

GeneratedScript repair(LlmGateway& gateway, const CodegenInputs& inputs,
                       const GeneratedScript& script, const ReviewResult& review) {
    LLMRequest req;
    req.agent = AgentName::generator;
    req.model_id = inputs.chat_model;
    req.temperature = 0.0;
    req.messages.push_back({ChatRole::system, kGeneratorContract});
    std::ostringstream user;
    user << "The previous script failed its dry run. Repair it.\n";
    user << "Model: " << inputs.model << "\n";
    user << "Library: " << to_string(inputs.library) << "\n";
    user << "Training data: " << inputs.config.train_path << "\n";
    if (inputs.config.test_path) user << "Test data: " << *inputs.config.test_path << "\n";
    user << "Feature count: " << inputs.profile.n_features << "\n";
    user << "Constructor parameters (defaults after user overrides): "
         << param_map_to_json(merged_params(inputs)).dump() << "\n";
    user << "Failure category: " << to_string(review.error_category) << "\n";
    user << "Stderr:\n" << review.stderr_excerpt << "\n";
    if (!review.fix_hint.empty()) user << "Reviewer hint: " << review.fix_hint << "\n";
    user << "\nDocumented constructor parameters:\n";
    for (const auto& p : inputs.doc.init_params) {
        user << "  " << p.name;
        if (p.default_value) user << " = " << p.default_value->python_literal();
        else user << " (required)";
        user << "\n";
    }
    user << "\nFailing script (revision " << script.revision << "):\n" << script.source_text;
    req.messages.push_back({ChatRole::user, user.str()});

    LLMResponse resp;
    try {
        resp = gateway.complete(req);
    } catch (const AgentError& e) {
        if (e.code() == Errc::BackendUnavailable)
            raise(Errc::PromptBudgetExceeded, std::string("repair failed: ") + e.what());
        throw;
    }

    GeneratedScript fixed = script;
    fixed.source_text = strip_code_fences(resp.content);
    fixed.revision = script.revision + 1;
    return fixed;
}

ValidationOutcome generate_validated(LlmGateway& gateway, const CodegenInputs& inputs,
                                     const SyntheticSample& sample, int max_iters,
                                     const DryRunOptions& options,
                                     const CodegenObserver& observer) {
    ValidationOutcome outcome;
    if (max_iters < 1) raise(Errc::BadOptions, "max_iters must be at least 1");

    GeneratedScript script = generate_script(gateway, inputs);
    if (observer.on_script) observer.on_script(script);
    for (int iter = 0; iter < max_iters; ++iter) {
        if (observer.on_validating) observer.on_validating(script.revision);
        ReviewResult review;
        try {
            review = dry_run(script, sample, options);
        } catch (const AgentError& e) {
            if (e.code() != Errc::SandboxFailure) throw;
            outcome.sandbox_failed = true;
            return outcome;
        }

        if (review.passed()) {
            if (observer.on_review) observer.on_review(review, script.revision);
            outcome.reviews.push_back(review);
            write_text_file(script.output_path, script.source_text);
            outcome.script = std::move(script);
            return outcome;
        }

        const bool will_repair = iter + 1 < max_iters;
        if (will_repair)
            review.fix_hint = reviewer_hint(gateway, inputs, script, review);
        if (observer.on_review) observer.on_review(review, script.revision);
        outcome.reviews.push_back(review);
        if (will_repair) {
            script = repair(gateway, inputs, script, outcome.reviews.back());
            if (observer.on_script) observer.on_script(script);
        }
    }
    return outcome;
}

} // namespace adagent
