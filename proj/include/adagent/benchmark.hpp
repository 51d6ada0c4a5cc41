#pragma once

#include "adagent/registry.hpp"
#include "adagent/session.hpp"

#include "json.hpp"

#include <map>
#include <string>
#include <vector>

namespace adagent {

struct BenchmarkPairRow {
    std::string dataset;
    std::string model;
    bool succeeded = false;
    double time_s = 0.0;      // pipeline generation: instruction -> script saved
    double eval_time_s = 0.0; // evaluator/optimizer wall time, when enabled
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    double cost = 0.0;
    std::string error; // first stage error, empty on success
};

struct BenchmarkReport {
    LibraryId library{};
    int pairs_attempted = 0;
    int pairs_succeeded = 0;
    double success_rate = 0.0; // percent
    double mean_time_s = 0.0;
    double mean_input_tokens = 0.0;
    double mean_output_tokens = 0.0;
    double mean_cost = 0.0;
    std::vector<BenchmarkPairRow> rows;

    nlohmann::json to_json() const;
    std::string to_csv() const;
    std::string summary_line() const; // success_rate printed to one decimal
};

struct BenchmarkOptions {
    SessionOptions session;
    int parallel = 1;
    bool write_reports = true; // benchmark_<library>.{json,csv} under out_dir
};

// Resolves a dataset argument to a path: an existing path is taken as-is,
// otherwise <data_root>/<name>{.mat,.csv,.npz,/} is probed.
std::string resolve_dataset_path(const std::string& dataset, const std::string& data_root);

// Runs every (dataset, model) pair as an independent quiet session and
// aggregates. Per-pair failures are recorded, never aborting the grid.
BenchmarkReport run_benchmark(const Registry& registry, LibraryId library,
                              const std::vector<std::string>& datasets,
                              const std::vector<std::string>& models,
                              const BenchmarkOptions& options);

// ---- model-selection evaluation ----

// (dataset, model) -> metric
using MetricTable = std::map<std::pair<std::string, std::string>, double>;

// CSV with a header row: dataset,model,metric
MetricTable load_metric_table_csv(const std::filesystem::path& path);

struct SelectionEvalRow {
    std::string dataset;
    std::vector<std::string> votes; // resolved, in query order
    double mean_vote_metric = 0.0;
    double best_metric = 0.0;      // max over the roster
    double average_baseline = 0.0; // mean over the roster
};

struct SelectionEvalReport {
    LibraryId library{};
    std::vector<SelectionEvalRow> rows;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

// For each dataset: query the reasoning model n times, resolve the votes,
// and report the mean metric of the votes next to the roster's best and
// mean (the two reference baselines). Raises MissingMetric when the table
// lacks a needed (dataset, model) entry.
SelectionEvalReport model_selection_eval(const Registry& registry, LibraryId library,
                                         const std::vector<std::string>& datasets,
                                         const MetricTable& table,
                                         const SessionOptions& options);

} // namespace adagent
