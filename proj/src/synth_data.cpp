#include "adagent/synth_data.hpp"

#include "adagent/util.hpp"

#include <algorithm>

namespace adagent {

TabularData make_gaussian_tabular(std::size_t rows, std::size_t cols, double anomaly_rate,
                                  double shift, std::size_t shifted_features,
                                  std::uint64_t seed) {
    Rng rng(seed);
    TabularData data;
    data.x.rows = rows;
    data.x.cols = cols;
    data.x.values.resize(rows * cols);
    for (auto& v : data.x.values) v = rng.next_gaussian();

    const auto n_anom = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                     static_cast<double>(rows) * anomaly_rate));
    std::vector<int> labels(rows, 0);
    // spread anomalies evenly so any split keeps both classes
    const std::size_t stride = std::max<std::size_t>(1, rows / n_anom);
    const std::size_t width = shifted_features == 0 ? cols : std::min(shifted_features, cols);
    std::size_t planted = 0;
    for (std::size_t r = stride / 2; r < rows && planted < n_anom; r += stride, ++planted) {
        labels[r] = 1;
        for (std::size_t c = 0; c < width; ++c) data.x.at(r, c) += shift;
    }
    data.labels = std::move(labels);
    return data;
}

TabularData make_planted_outliers(std::uint64_t seed) {
    return make_gaussian_tabular(500, 8, 0.08, 1.6, 4, seed);
}

GraphData make_toy_graph(std::size_t nodes, std::size_t edges, std::size_t feature_width,
                         double anomaly_rate, std::uint64_t seed) {
    Rng rng(seed);
    GraphData g;
    g.node_features.rows = nodes;
    g.node_features.cols = feature_width;
    g.node_features.values.resize(nodes * feature_width);
    for (auto& v : g.node_features.values) v = rng.next_gaussian();

    // a ring keeps the graph connected; extra random edges on top
    for (std::size_t i = 0; i < nodes; ++i)
        g.edges.emplace_back(static_cast<std::int64_t>(i),
                             static_cast<std::int64_t>((i + 1) % nodes));
    while (g.edges.size() < edges) {
        const auto u = static_cast<std::int64_t>(rng.next_index(nodes));
        const auto v = static_cast<std::int64_t>(rng.next_index(nodes));
        g.edges.emplace_back(u, v);
    }

    const auto n_anom =
        std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(nodes) * anomaly_rate));
    std::vector<int> labels(nodes, 0);
    const std::size_t stride = std::max<std::size_t>(1, nodes / n_anom);
    std::size_t planted = 0;
    for (std::size_t i = stride / 2; i < nodes && planted < n_anom; i += stride, ++planted) {
        labels[i] = 1;
        for (std::size_t c = 0; c < feature_width; ++c) g.node_features.at(i, c) += 3.0;
    }
    g.labels = std::move(labels);
    return g;
}

TimeSeriesData make_toy_series(std::size_t train_len, std::size_t test_len, std::size_t channels,
                               std::uint64_t seed) {
    Rng rng(seed);
    TimeSeriesData ts;
    auto fill = [&rng](Matrix& m, std::size_t rows, std::size_t cols) {
        m.rows = rows;
        m.cols = cols;
        m.values.resize(rows * cols);
        for (auto& v : m.values) v = rng.next_gaussian();
    };
    fill(ts.train, train_len, channels);
    fill(ts.test, test_len, channels);
    ts.test_labels.assign(test_len, 0);
    // one anomalous burst in the middle fifth of the test span
    const std::size_t from = test_len * 2 / 5;
    const std::size_t to = std::min(test_len, from + std::max<std::size_t>(2, test_len / 10));
    for (std::size_t t = from; t < to; ++t) {
        ts.test_labels[t] = 1;
        for (std::size_t c = 0; c < channels; ++c) ts.test.at(t, c) += 4.0;
    }
    return ts;
}

} // namespace adagent
