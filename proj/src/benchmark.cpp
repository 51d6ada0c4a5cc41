#include "adagent/benchmark.hpp"

#include "adagent/errors.hpp"
#include "adagent/processor.hpp"
#include "adagent/selector.hpp"
#include "adagent/util.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace adagent {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class NullBuffer : public std::streambuf {
    int overflow(int c) override { return c; }
};

std::ostream& null_stream() {
    static NullBuffer buffer;
    static std::ostream stream(&buffer);
    return stream;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    return out + "\"";
}

} // namespace

json BenchmarkReport::to_json() const {
    json j;
    j["library"] = to_string(library);
    j["pairs_attempted"] = pairs_attempted;
    j["pairs_succeeded"] = pairs_succeeded;
    j["success_rate_percent"] = success_rate;
    j["mean_time_s"] = mean_time_s;
    j["mean_input_tokens"] = mean_input_tokens;
    j["mean_output_tokens"] = mean_output_tokens;
    j["mean_cost_usd"] = mean_cost;
    json rows_json = json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"dataset", r.dataset},
                             {"model", r.model},
                             {"succeeded", r.succeeded},
                             {"time_s", r.time_s},
                             {"eval_time_s", r.eval_time_s},
                             {"input_tokens", r.input_tokens},
                             {"output_tokens", r.output_tokens},
                             {"cost_usd", r.cost},
                             {"error", r.error}});
    }
    j["pairs"] = std::move(rows_json);
    return j;
}

std::string BenchmarkReport::to_csv() const {
    std::ostringstream out;
    out << "dataset,model,succeeded,time_s,eval_time_s,input_tokens,output_tokens,cost_usd,"
           "error\n";
    for (const auto& r : rows) {
        out << csv_escape(r.dataset) << "," << csv_escape(r.model) << ","
            << (r.succeeded ? 1 : 0) << "," << format_double(r.time_s) << ","
            << format_double(r.eval_time_s) << "," << r.input_tokens << "," << r.output_tokens
            << "," << format_double(r.cost) << "," << csv_escape(r.error) << "\n";
    }
    return out.str();
}

std::string BenchmarkReport::summary_line() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%s: success %.1f%% (%d/%d), mean time %.1f s, mean tokens %.0f/%.0f, "
                  "mean cost $%.3f",
                  to_string(library), success_rate, pairs_succeeded, pairs_attempted, mean_time_s,
                  mean_input_tokens, mean_output_tokens, mean_cost);
    return buf;
}

std::string resolve_dataset_path(const std::string& dataset, const std::string& data_root) {
    if (fs::exists(dataset)) return dataset;
    const std::string base = resolve_against_data_root(dataset, data_root);
    if (fs::exists(base)) return base;
    for (const char* ext : {".mat", ".csv", ".npz"}) {
        const std::string candidate = base + ext;
        if (fs::exists(candidate)) return candidate;
    }
    raise(Errc::MissingDataset, "no dataset found for '" + dataset + "' under " + data_root);
}

BenchmarkReport run_benchmark(const Registry& registry, LibraryId library,
                              const std::vector<std::string>& datasets,
                              const std::vector<std::string>& models,
                              const BenchmarkOptions& options) {
    // roster validation up front: a typo fails fast, not 45 sessions in
    for (const auto& model : models) {
        const auto hit = registry.resolve_model(model);
        if (!hit || hit->library != library)
            raise(Errc::UnknownModel,
                  "'" + model + "' is not in the " + std::string(to_string(library)) + " roster");
    }

    struct Pair {
        std::string dataset;
        std::string model;
    };
    std::vector<Pair> pairs;
    for (const auto& d : datasets)
        for (const auto& m : models) pairs.push_back({d, m});

    BenchmarkReport report;
    report.library = library;
    report.pairs_attempted = static_cast<int>(pairs.size());
    report.rows.resize(pairs.size());

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= pairs.size()) return;
            const Pair& pair = pairs[i];
            BenchmarkPairRow row;
            row.dataset = pair.dataset;
            row.model = pair.model;

            SessionOptions session = options.session;
            session.out = &null_stream();
            std::ostringstream errors;
            session.err = &errors;
            session.session_id = "bench-" + pair.model + "-" + pair.dataset;

            const auto started = std::chrono::steady_clock::now();
            bool timed_by_session = false;
            try {
                const std::string path =
                    resolve_dataset_path(pair.dataset, options.session.data_root);
                const std::string command = "Run " + pair.model + " on " + path;
                SessionResult result = run_session(command, session);
                row.succeeded = result.exit_code == 0;
                row.time_s = result.generation_seconds;
                row.eval_time_s = result.evaluation_seconds;
                timed_by_session = true;
                const LedgerTotals totals = result.workspace->ledger().totals();
                row.input_tokens = totals.input_tokens;
                row.output_tokens = totals.output_tokens;
                row.cost = totals.cost;
            } catch (const std::exception& e) {
                row.succeeded = false;
                errors << e.what();
            }
            if (!timed_by_session)
                row.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                           started)
                                 .count();
            if (!row.succeeded) {
                std::string text = errors.str();
                const auto nl = text.find('\n');
                row.error = nl == std::string::npos ? text : text.substr(0, nl);
            }
            report.rows[i] = std::move(row);
        }
    };

    const int parallel = std::max(1, options.parallel);
    if (parallel == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < parallel; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    double time_sum = 0.0, in_sum = 0.0, out_sum = 0.0, cost_sum = 0.0;
    for (const auto& r : report.rows) {
        if (r.succeeded) ++report.pairs_succeeded;
        time_sum += r.time_s;
        in_sum += static_cast<double>(r.input_tokens);
        out_sum += static_cast<double>(r.output_tokens);
        cost_sum += r.cost;
    }
    const double n = static_cast<double>(report.pairs_attempted);
    if (n > 0) {
        report.success_rate = 100.0 * static_cast<double>(report.pairs_succeeded) / n;
        report.mean_time_s = time_sum / n;
        report.mean_input_tokens = in_sum / n;
        report.mean_output_tokens = out_sum / n;
        report.mean_cost = cost_sum / n;
    }

    if (options.write_reports) {
        const fs::path base = fs::path(options.session.out_dir);
        write_text_file(base / ("benchmark_" + std::string(to_string(library)) + ".json"),
                        report.to_json().dump(2) + "\n");
        write_text_file(base / ("benchmark_" + std::string(to_string(library)) + ".csv"),
                        report.to_csv());
    }
    return report;
}

// ---------------------------------------------------- selection evaluation

MetricTable load_metric_table_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::MissingDataset, "cannot open metric table " + path.string());
    MetricTable table;
    std::string line;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (first) {
            first = false;
            continue; // header
        }
        std::istringstream cells(line);
        std::string dataset, model, metric;
        if (!std::getline(cells, dataset, ',') || !std::getline(cells, model, ',') ||
            !std::getline(cells, metric))
            raise(Errc::CorruptFile,
                  path.string() + ":" + std::to_string(lineno) + ": expected dataset,model,metric");
        table[{trim(dataset), trim(model)}] = std::stod(trim(metric));
    }
    return table;
}

json SelectionEvalReport::to_json() const {
    json j;
    j["library"] = to_string(library);
    json rows_json = json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"dataset", r.dataset},
                             {"votes", r.votes},
                             {"mean_vote_metric", r.mean_vote_metric},
                             {"best_metric", r.best_metric},
                             {"average_baseline", r.average_baseline}});
    }
    j["datasets"] = std::move(rows_json);
    return j;
}

std::string SelectionEvalReport::to_csv() const {
    std::ostringstream out;
    out << "dataset,votes,mean_vote_metric,best_metric,average_baseline\n";
    for (const auto& r : rows) {
        std::string votes;
        for (std::size_t i = 0; i < r.votes.size(); ++i) {
            if (i) votes += ";";
            votes += r.votes[i];
        }
        out << csv_escape(r.dataset) << "," << csv_escape(votes) << ","
            << format_double(r.mean_vote_metric) << "," << format_double(r.best_metric) << ","
            << format_double(r.average_baseline) << "\n";
    }
    return out.str();
}

SelectionEvalReport model_selection_eval(const Registry& registry, LibraryId library,
                                         const std::vector<std::string>& datasets,
                                         const MetricTable& table,
                                         const SessionOptions& options) {
    SelectionEvalReport report;
    report.library = library;
    const LibrarySpec& lib = registry.library(library);

    TokenLedger ledger("select-eval");
    LlmGateway gateway(make_session_backend(options),
                       options.prices_path.empty() ? PriceTable::builtin()
                                                   : PriceTable::load_file(options.prices_path),
                       ledger);

    auto metric_of = [&](const std::string& dataset, const std::string& model) {
        auto it = table.find({dataset, model});
        if (it == table.end())
            raise(Errc::MissingMetric, "no metric for (" + dataset + ", " + model + ")");
        return it->second;
    };

    for (const auto& dataset : datasets) {
        SelectionEvalRow row;
        row.dataset = dataset;

        const std::string path = resolve_dataset_path(dataset, options.data_root);
        const LoadedDataset loaded = load_dataset(path);
        DatasetProfile profile = build_profile(loaded, nullptr, loaded.profile.modality);

        SelectorOptions sopts;
        sopts.reasoning_model = options.reasoning_model;
        sopts.n_queries = options.n_queries;
        const SelectionOutcome outcome =
            recommend_model(gateway, registry, library, profile, sopts);
        row.votes = outcome.models;

        double vote_sum = 0.0;
        for (const auto& vote : row.votes) vote_sum += metric_of(dataset, vote);
        row.mean_vote_metric = vote_sum / static_cast<double>(row.votes.size());

        double best = 0.0, sum = 0.0;
        bool any = false;
        for (const auto& model : lib.models) {
            const double m = metric_of(dataset, model.canonical);
            best = any ? std::max(best, m) : m;
            sum += m;
            any = true;
        }
        row.best_metric = best;
        row.average_baseline = sum / static_cast<double>(lib.models.size());
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace adagent
