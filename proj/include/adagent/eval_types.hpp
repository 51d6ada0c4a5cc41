#pragma once

#include "adagent/value.hpp"

#include "json.hpp"

#include <optional>
#include <string>

namespace adagent {

struct EvaluationReport {
    std::string model;
    std::string dataset;
    std::optional<double> auroc;
    std::optional<double> auprc;
    std::optional<double> f1;
    std::size_t n_test = 0;
    ParamMap params;
    double wall_time_s = 0.0;
    std::vector<std::string> warnings;

    bool has_metrics() const { return auroc || auprc || f1; }

    nlohmann::json to_json() const;
};

enum class ProposedBy { initial, llm, stub };
const char* to_string(ProposedBy p);

struct OptimizationTrial {
    int index = 0;
    ParamMap params;
    EvaluationReport report;
    ProposedBy proposed_by = ProposedBy::initial;
};

} // namespace adagent
