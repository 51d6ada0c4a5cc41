#include "adagent/metrics.hpp"

#include "adagent/errors.hpp"
#include "adagent/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adagent {

namespace {

struct ClassCounts {
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

ClassCounts check_inputs(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        raise(Errc::TypeMismatch, "scores and labels differ in length");
    if (scores.empty()) raise(Errc::DegenerateLabels, "empty inputs");
    ClassCounts counts;
    for (int y : labels) {
        if (y == 1) ++counts.positives;
        else if (y == 0) ++counts.negatives;
        else raise(Errc::TypeMismatch, "labels must be 0/1");
    }
    if (counts.positives == 0 || counts.negatives == 0)
        raise(Errc::DegenerateLabels, "both classes must be present");
    return counts;
}

} // namespace

double compute_auroc(std::span<const double> scores, std::span<const int> labels) {
    const ClassCounts counts = check_inputs(scores, labels);
    const std::size_t n = scores.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks within tied blocks
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg_rank;
        i = j + 1;
    }

    double rank_sum_pos = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (labels[k] == 1) rank_sum_pos += rank[k];

    const double p = static_cast<double>(counts.positives);
    const double u = rank_sum_pos - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(counts.negatives));
}

double compute_auprc(std::span<const double> scores, std::span<const int> labels) {
    const ClassCounts counts = check_inputs(scores, labels);
    const std::size_t n = scores.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const double total_pos = static_cast<double>(counts.positives);
    double tp = 0.0, fp = 0.0;
    double prev_recall = 0.0;
    double ap = 0.0;

    std::size_t i = 0;
    while (i < n) {
        // consume one tied block atomically: only block boundaries are
        // reachable operating points of the threshold sweep
        std::size_t j = i;
        double block_pos = 0.0, block_neg = 0.0;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1) ++block_pos;
            else ++block_neg;
            ++j;
        }
        tp += block_pos;
        fp += block_neg;
        const double precision = tp / (tp + fp);
        const double recall = tp / total_pos;
        ap += precision * (recall - prev_recall);
        prev_recall = recall;
        i = j;
    }
    return ap;
}

std::vector<int> binarize_scores(std::span<const double> scores, const ThresholdRule& rule) {
    double threshold = 0.0;
    if (rule.fixed_threshold) {
        threshold = *rule.fixed_threshold;
    } else {
        if (rule.anomaly_rate < 0.0 || rule.anomaly_rate > 1.0)
            raise(Errc::BadOptions, "anomaly_rate must lie in [0, 1]");
        threshold = quantile_linear(std::vector<double>(scores.begin(), scores.end()),
                                    1.0 - rule.anomaly_rate);
    }
    std::vector<int> out(scores.size(), 0);
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > threshold ? 1 : 0;
    return out;
}

double compute_f1(std::span<const double> scores, std::span<const int> labels,
                  const ThresholdRule& rule) {
    check_inputs(scores, labels);
    const std::vector<int> pred = binarize_scores(scores, rule);
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == 1 && labels[i] == 1) ++tp;
        else if (pred[i] == 1) ++fp;
        else if (labels[i] == 1) ++fn;
    }
    const double denom = 2.0 * tp + fp + fn;
    if (denom == 0.0) return 0.0; // nothing predicted, nothing to hit
    return 2.0 * tp / denom;
}

} // namespace adagent
