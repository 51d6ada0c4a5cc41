#include "adagent/metrics.hpp"

#include "adagent/errors.hpp"
#include "adagent/util.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

using namespace adagent;

namespace {

// ---- independent oracles (kept deliberately naive) ----

// AUROC: count over every positive-negative pair, ties worth one half.
double auroc_pairwise_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// AUPRC: direct threshold sweep; at each distinct score t, recount tp/fp
// over the whole input with the rule score >= t.
double auprc_sweep_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
    const double total_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    double ap = 0.0;
    double prev_recall = 0.0;
    for (double t : thresholds) {
        double tp = 0.0, fp = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) {
                if (labels[i] == 1) ++tp;
                else ++fp;
            }
        }
        const double recall = tp / total_pos;
        ap += (tp / (tp + fp)) * (recall - prev_recall);
        prev_recall = recall;
    }
    return ap;
}

double f1_confusion_oracle(const std::vector<int>& pred, const std::vector<int>& labels) {
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == 1 && labels[i] == 1) ++tp;
        else if (pred[i] == 1) ++fp;
        else if (labels[i] == 1) ++fn;
    }
    if (2 * tp + fp + fn == 0) return 0.0;
    return 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

struct RandomCase {
    std::vector<double> scores;
    std::vector<int> labels;
};

RandomCase random_case(Rng& rng, std::size_t max_n, bool allow_ties) {
    for (;;) {
        const std::size_t n = 2 + rng.next_index(max_n - 1);
        RandomCase c;
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            double s = rng.next_double();
            if (allow_ties) s = std::floor(s * 4.0) / 4.0; // heavy ties
            c.scores.push_back(s);
            const int y = rng.next_double() < 0.4 ? 1 : 0;
            c.labels.push_back(y);
            (y ? has_pos : has_neg) = true;
        }
        if (has_pos && has_neg) return c;
    }
}

} // namespace

TEST_CASE("auroc: pinned examples") {
    CHECK(compute_auroc(std::vector<double>{0.1, 0.2, 0.9}, std::vector<int>{0, 0, 1}) == 1.0);
    CHECK(compute_auroc(std::vector<double>{0.9, 0.2, 0.1}, std::vector<int>{0, 0, 1}) == 0.0);
    // one tie between classes: half credit over the single tied pair
    CHECK(compute_auroc(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}) == 0.5);
}

TEST_CASE("auroc: matches the pairwise oracle on random instances") {
    Rng rng(2024);
    for (int k = 0; k < 200; ++k) {
        const RandomCase c = random_case(rng, 12, k % 2 == 0);
        const double fast = compute_auroc(c.scores, c.labels);
        const double slow = auroc_pairwise_oracle(c.scores, c.labels);
        CHECK(std::abs(fast - slow) <= 1e-12);
        CHECK(fast >= 0.0);
        CHECK(fast <= 1.0);
    }
}

TEST_CASE("auroc: invariant under strictly increasing transforms") {
    Rng rng(7);
    for (int k = 0; k < 50; ++k) {
        const RandomCase c = random_case(rng, 24, false);
        const double base = compute_auroc(c.scores, c.labels);

        std::vector<double> exp_scores, affine_scores;
        for (double s : c.scores) {
            exp_scores.push_back(std::exp(s));
            affine_scores.push_back(3.5 * s + 11.0);
        }
        CHECK(std::abs(compute_auroc(exp_scores, c.labels) - base) <= 1e-12);
        CHECK(std::abs(compute_auroc(affine_scores, c.labels) - base) <= 1e-12);
    }
}

TEST_CASE("auroc: score negation complements when no ties exist") {
    Rng rng(99);
    for (int k = 0; k < 50; ++k) {
        RandomCase c = random_case(rng, 16, false);
        std::set<double> seen;
        bool unique = true;
        for (double s : c.scores) unique = unique && seen.insert(s).second;
        if (!unique) continue;
        std::vector<double> negated;
        for (double s : c.scores) negated.push_back(-s);
        CHECK(std::abs(compute_auroc(c.scores, c.labels) +
                       compute_auroc(negated, c.labels) - 1.0) <= 1e-12);
    }
}

TEST_CASE("auroc: single-class labels are degenerate") {
    try {
        (void)compute_auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1});
        FAIL("expected DegenerateLabels");
    } catch (const AgentError& e) {
        CHECK(e.code() == Errc::DegenerateLabels);
    }
}

TEST_CASE("auprc: pinned examples") {
    CHECK(compute_auprc(std::vector<double>{0.9, 0.8, 0.1, 0.2}, std::vector<int>{1, 1, 0, 0}) ==
          1.0);
    // all scores equal: the curve collapses to one block at the prevalence
    CHECK(compute_auprc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, std::vector<int>{1, 0, 0, 0}) ==
          doctest::Approx(0.25).epsilon(1e-12));
    CHECK(compute_auprc(std::vector<double>{1.0, 1.0}, std::vector<int>{1, 0}) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("auprc: matches the direct threshold-sweep oracle") {
    Rng rng(5150);
    for (int k = 0; k < 200; ++k) {
        const RandomCase c = random_case(rng, 12, k % 3 != 0);
        const double fast = compute_auprc(c.scores, c.labels);
        const double slow = auprc_sweep_oracle(c.scores, c.labels);
        CHECK(std::abs(fast - slow) <= 1e-12);
        CHECK(fast >= 0.0);
        CHECK(fast <= 1.0);
    }
}

TEST_CASE("f1: pinned examples") {
    ThresholdRule rule;
    rule.anomaly_rate = 0.25;
    const std::vector<double> scores{0.1, 0.2, 0.3, 0.9};
    const std::vector<int> labels{0, 0, 0, 1};
    CHECK(compute_f1(scores, labels, rule) == 1.0);

    // nothing predicted positive -> 0 by convention
    ThresholdRule none;
    none.fixed_threshold = 100.0;
    CHECK(compute_f1(scores, labels, none) == 0.0);
}

TEST_CASE("f1: matches the confusion-matrix oracle exactly") {
    Rng rng(31337);
    for (int k = 0; k < 200; ++k) {
        const RandomCase c = random_case(rng, 16, k % 2 == 0);
        ThresholdRule rule;
        rule.anomaly_rate = 0.05 + 0.5 * rng.next_double();
        const std::vector<int> pred = binarize_scores(c.scores, rule);
        CHECK(compute_f1(c.scores, c.labels, rule) == f1_confusion_oracle(pred, c.labels));
    }
}

TEST_CASE("quantile: linear interpolation, numpy convention") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(quantile_linear(v, 0.0) == 1.0);
    CHECK(quantile_linear(v, 1.0) == 4.0);
    CHECK(quantile_linear(v, 0.5) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(quantile_linear(v, 1.0 / 3.0) == doctest::Approx(2.0).epsilon(1e-12));
}
