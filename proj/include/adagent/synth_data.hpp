#pragma once

#include "adagent/dataio.hpp"

#include <cstdint>

namespace adagent {

// Deterministic dataset builders for demos, fixtures and tests.

// Gaussian inliers with a shifted anomalous minority. `shift` is added to
// the first `shifted_features` columns of anomalous rows (all columns when
// 0). Labels are 0/1.
TabularData make_gaussian_tabular(std::size_t rows, std::size_t cols, double anomaly_rate,
                                  double shift, std::size_t shifted_features, std::uint64_t seed);

// 500 x 8 planted-outlier set: the anomaly signal lives in the first four
// features only, so down-weighting the other four provably sharpens any
// deviation-based detector.
TabularData make_planted_outliers(std::uint64_t seed);

GraphData make_toy_graph(std::size_t nodes, std::size_t edges, std::size_t feature_width,
                         double anomaly_rate, std::uint64_t seed);

TimeSeriesData make_toy_series(std::size_t train_len, std::size_t test_len, std::size_t channels,
                               std::uint64_t seed);

} // namespace adagent
