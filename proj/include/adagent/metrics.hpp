#pragma once

#include <optional>
#include <span>
#include <vector>

namespace adagent {

// Detection metrics over per-sample anomaly scores and binary labels.
// All three raise DegenerateLabels when the labels hold a single class
// (callers that tolerate that catch and record the metric as absent).

// Probability that a random positive outranks a random negative, ties
// counting one half (rank / Mann-Whitney formulation).
double compute_auroc(std::span<const double> scores, std::span<const int> labels);

// Average precision with step interpolation over distinct score thresholds;
// tied scores move through the curve as one block, so an all-tied input
// degenerates to the positive prevalence.
double compute_auprc(std::span<const double> scores, std::span<const int> labels);

struct ThresholdRule {
    // predicted positive <=> score > quantile(scores, 1 - anomaly_rate),
    // unless an explicit threshold is given
    double anomaly_rate = 0.1;
    std::optional<double> fixed_threshold;
};

// F1 of the binarized predictions; 0.0 when nothing is predicted positive.
double compute_f1(std::span<const double> scores, std::span<const int> labels,
                  const ThresholdRule& rule);

std::vector<int> binarize_scores(std::span<const double> scores, const ThresholdRule& rule);

} // namespace adagent
