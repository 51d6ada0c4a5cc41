#pragma once

#include "adagent/registry.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace adagent {

enum class DataFormat { mat, csv, npz, graph_bundle, ts_bundle };
const char* to_string(DataFormat f);

// Row-major dense matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values; // rows * cols

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

struct TabularData {
    Matrix x;
    std::optional<std::vector<int>> labels; // 0/1, one per row
    std::vector<std::string> column_names;  // csv only; empty otherwise
};

struct GraphData {
    Matrix node_features;
    std::vector<std::pair<std::int64_t, std::int64_t>> edges;
    std::optional<std::vector<int>> labels; // per node
};

struct TimeSeriesData {
    Matrix train;                 // time x channels
    Matrix test;                  // time x channels
    std::vector<int> test_labels; // 0/1 per test row
};

struct Dataset {
    DataFormat format{};
    std::optional<TabularData> tabular;
    std::optional<GraphData> graph;
    std::optional<TimeSeriesData> time_series;
};

// What the modality rule saw while loading; the processor feeds this to
// infer_modality.
struct ModalityEvidence {
    DataFormat format{};
    bool has_edges = false;
    bool first_column_timeish = false; // csv: timestamp-like leading column
    std::vector<std::string> column_names;
    std::vector<std::string> sample_first_column; // first few raw cells
};

// Loads a dataset file (or a time-series bundle directory). Format is chosen
// by extension / directory layout; key conventions:
//   .mat / .npz tabular : arrays X (n x d) and optional y (n)
//   .mat / .npz graph   : arrays x (n x d), edge_index (2 x m or m x 2), optional y
//   .csv                : header row, optional trailing label column named label/y
//   directory           : train.csv, test.csv, test_label.csv
// Errors: UnsupportedFormat, CorruptFile, EmptyDataset, MissingDataset.
Dataset load_dataset_file(const std::filesystem::path& path, ModalityEvidence* evidence = nullptr);

// Writers, used for fixtures and for staging synthetic samples in the same
// format as the real data.
void write_mat_tabular(const std::filesystem::path& path, const Matrix& x,
                       const std::optional<std::vector<int>>& labels);
void write_mat_graph(const std::filesystem::path& path, const GraphData& graph);
void write_csv_tabular(const std::filesystem::path& path, const Matrix& x,
                       const std::optional<std::vector<int>>& labels,
                       const std::vector<std::string>& column_names = {});
void write_npz_tabular(const std::filesystem::path& path, const Matrix& x,
                       const std::optional<std::vector<int>>& labels);
void write_npz_graph(const std::filesystem::path& path, const GraphData& graph);
void write_ts_bundle(const std::filesystem::path& dir, const TimeSeriesData& ts);

// Stages `data` at `path` in the same serialization as `like_format`.
void write_dataset_as(const std::filesystem::path& path, const Dataset& data);

} // namespace adagent
