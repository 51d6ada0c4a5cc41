#include "adagent/benchmark.hpp"
#include "adagent/errors.hpp"
#include "adagent/info_miner.hpp"
#include "adagent/memory.hpp"
#include "adagent/registry.hpp"
#include "adagent/session.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace adagent;

struct CommonArgs {
    std::string backend = "live";
    std::string transcript;
    std::string cache_path = "./.ad_agent_cache.json";
    int cache_ttl_days = LongTermCache::kDefaultTtlDays;
    std::string out_dir = "./generated_scripts";
    std::string results_dir = "./results";
    std::string data_root = "./data";
    std::string interpreter = "python3";
    int max_iters = 3;
    double dry_run_timeout = 300.0;
    int optimizer_budget = 5;
    std::string registry_path;
    std::string prices_path;
    std::string chat_model = "gpt-4o";
    std::string reasoning_model = "o4-mini";
};

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--llm-backend", args.backend, "LLM backend: live, replay or record")
        ->check(CLI::IsMember({"live", "replay", "record"}));
    cmd->add_option("--transcript", args.transcript,
                    "JSONL transcript path (required for replay/record)");
    cmd->add_option("--cache-path", args.cache_path, "long-term documentation cache file");
    cmd->add_option("--cache-ttl-days", args.cache_ttl_days, "cache freshness window in days");
    cmd->add_option("--out-dir", args.out_dir, "directory for generated scripts and reports");
    cmd->add_option("--results-dir", args.results_dir, "directory for evaluation reports");
    cmd->add_option("--data-root", args.data_root, "root for bare dataset names");
    cmd->add_option("--interpreter", args.interpreter, "interpreter for generated pipelines");
    cmd->add_option("--max-iters", args.max_iters, "generator/reviewer repair budget");
    cmd->add_option("--dry-run-timeout", args.dry_run_timeout, "dry-run timeout in seconds");
    cmd->add_option("--optimizer-budget", args.optimizer_budget, "optimizer trial budget");
    cmd->add_option("--registry", args.registry_path, "override the bundled registry manifest");
    cmd->add_option("--prices", args.prices_path, "override the bundled price table");
    cmd->add_option("--chat-model", args.chat_model, "chat model id");
    cmd->add_option("--reasoning-model", args.reasoning_model,
                    "reasoning model id for recommendations");
}

SessionOptions to_session_options(const CommonArgs& args) {
    SessionOptions options;
    if (args.backend == "replay") options.backend = BackendKind::replay;
    else if (args.backend == "record") options.backend = BackendKind::record;
    else options.backend = BackendKind::live;
    options.transcript_path = args.transcript;
    options.cache_path = args.cache_path;
    options.cache_ttl_days = args.cache_ttl_days;
    options.out_dir = args.out_dir;
    options.results_dir = args.results_dir;
    options.data_root = args.data_root;
    options.interpreter = args.interpreter;
    options.max_iters = args.max_iters;
    options.dry_run_timeout_s = args.dry_run_timeout;
    options.optimizer_budget = args.optimizer_budget;
    options.registry_path = args.registry_path;
    options.prices_path = args.prices_path;
    options.chat_model = args.chat_model;
    options.reasoning_model = args.reasoning_model;
    return options;
}

Registry load_registry(const CommonArgs& args) {
    return args.registry_path.empty() ? Registry::builtin()
                                      : Registry::load_file(args.registry_path);
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ad-agent: natural-language anomaly-detection pipelines"};
    app.require_subcommand(1);

    // ---- run ----
    CommonArgs run_args;
    bool run_evaluate = false, run_optimize = false;
    std::string run_command, run_session_id;
    auto* run_cmd = app.add_subcommand("run", "run one pipeline-building session");
    add_common_flags(run_cmd, run_args);
    run_cmd->add_flag("--evaluate", run_evaluate, "run the evaluator on the real data");
    run_cmd->add_flag("--optimize", run_optimize, "run the hyperparameter optimizer");
    run_cmd->add_option("--command", run_command,
                        "the instruction; omit to be prompted interactively");
    run_cmd->add_option("--session-id", run_session_id, "explicit session id");

    // ---- bench ----
    CommonArgs bench_args;
    std::string bench_library = "pyod", bench_datasets, bench_models;
    int bench_parallel = 1;
    auto* bench_cmd = app.add_subcommand("bench", "run a dataset x model grid");
    add_common_flags(bench_cmd, bench_args);
    bench_cmd->add_option("--library", bench_library, "pyod, pygod or tslib")
        ->check(CLI::IsMember({"pyod", "pygod", "tslib"}));
    bench_cmd->add_option("--datasets", bench_datasets,
                          "comma-separated dataset names or paths (default: the library's "
                          "benchmark roster)");
    bench_cmd->add_option("--models", bench_models,
                          "comma-separated model names (default: the full roster)");
    bench_cmd->add_option("--parallel", bench_parallel, "concurrent sessions");

    // ---- select-eval ----
    CommonArgs sel_args;
    std::string sel_library = "pyod", sel_datasets, sel_table;
    int sel_queries = 3;
    auto* sel_cmd = app.add_subcommand(
        "select-eval", "compare recommendation votes against a per-pair metric table");
    add_common_flags(sel_cmd, sel_args);
    sel_cmd->add_option("--library", sel_library, "pyod, pygod or tslib")
        ->check(CLI::IsMember({"pyod", "pygod", "tslib"}));
    sel_cmd->add_option("--datasets", sel_datasets, "comma-separated dataset names or paths")
        ->required();
    sel_cmd->add_option("--metrics-table", sel_table, "CSV of dataset,model,metric")->required();
    sel_cmd->add_option("--n-queries", sel_queries, "recommendation queries per dataset");

    // ---- refresh-cache ----
    CommonArgs refresh_args;
    bool refresh_all = false, refresh_remine = false;
    auto* refresh_cmd =
        app.add_subcommand("refresh-cache", "drop stale cache entries (optionally re-mine them)");
    add_common_flags(refresh_cmd, refresh_args);
    refresh_cmd->add_flag("--all", refresh_all, "drop every entry, fresh or stale");
    refresh_cmd->add_flag("--remine", refresh_remine,
                          "immediately re-mine dropped entries via the configured backend");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            SessionOptions options = to_session_options(run_args);
            options.evaluate = run_evaluate;
            options.optimize = run_optimize;
            options.session_id = run_session_id;
            std::optional<std::string> command;
            if (!run_command.empty()) command = run_command;
            return run_session(command, options).exit_code;
        }

        if (bench_cmd->parsed()) {
            const Registry registry = load_registry(bench_args);
            const LibraryId library = *library_from_string(bench_library);
            const LibrarySpec& spec = registry.library(library);
            std::vector<std::string> datasets =
                bench_datasets.empty() ? spec.datasets : split_list(bench_datasets);
            std::vector<std::string> models;
            if (bench_models.empty())
                for (const auto& m : spec.models) models.push_back(m.canonical);
            else
                models = split_list(bench_models);

            BenchmarkOptions options;
            options.session = to_session_options(bench_args);
            options.parallel = bench_parallel;
            const BenchmarkReport report =
                run_benchmark(registry, library, datasets, models, options);
            std::cout << report.summary_line() << "\n";
            std::cout << "pairs: " << report.pairs_succeeded << "/" << report.pairs_attempted
                      << " succeeded; reports under " << options.session.out_dir << "\n";
            return report.pairs_succeeded == report.pairs_attempted ? 0 : 2;
        }

        if (sel_cmd->parsed()) {
            const Registry registry = load_registry(sel_args);
            const LibraryId library = *library_from_string(sel_library);
            SessionOptions options = to_session_options(sel_args);
            options.n_queries = sel_queries;
            const MetricTable table = load_metric_table_csv(sel_table);
            const SelectionEvalReport report = model_selection_eval(
                registry, library, split_list(sel_datasets), table, options);
            std::cout << report.to_csv();
            write_text_file(std::filesystem::path(options.out_dir) /
                                ("select_eval_" + sel_library + ".json"),
                            report.to_json().dump(2) + "\n");
            return 0;
        }

        if (refresh_cmd->parsed()) {
            LongTermCache cache =
                LongTermCache::load(refresh_args.cache_path, refresh_args.cache_ttl_days);
            const auto now = std::chrono::system_clock::now();
            const auto dropped = cache.prune(now, refresh_all);
            std::cout << "dropped " << dropped.size() << " entr" << (dropped.size() == 1 ? "y" : "ies")
                      << " from " << refresh_args.cache_path << "\n";
            if (refresh_remine && !dropped.empty()) {
                SessionOptions options = to_session_options(refresh_args);
                TokenLedger ledger("refresh-cache");
                LlmGateway gateway(make_session_backend(options),
                                   options.prices_path.empty()
                                       ? PriceTable::builtin()
                                       : PriceTable::load_file(options.prices_path),
                                   ledger);
                for (const auto& [library, model] : dropped) {
                    MinerOptions mopts;
                    mopts.search_model = options.chat_model;
                    mopts.force_web = true;
                    get_model_info(gateway, cache, library, model, now, mopts);
                    std::cout << "re-mined " << to_string(library) << "/" << model << "\n";
                }
            }
            return 0;
        }
    } catch (const AgentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
