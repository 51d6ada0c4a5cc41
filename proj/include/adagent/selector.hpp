#pragma once

#include "adagent/gateway.hpp"
#include "adagent/processor.hpp"
#include "adagent/registry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace adagent {

struct RecommendationVote {
    std::string raw_answer;
    std::optional<std::string> resolved; // canonical name, roster-valid
    int query_index = 0;
};

struct SelectionOutcome {
    LibraryId library{};
    std::vector<std::string> models;        // user list, or resolved votes in query order
    std::vector<RecommendationVote> votes;  // present only on the recommendation path

    bool recommended() const { return !votes.empty(); }
};

// modality -> library; total over the enum.
LibraryId select_library(const Registry& registry, const DatasetProfile& profile);

struct SelectorOptions {
    std::string reasoning_model = "o4-mini";
    int n_queries = 3;
};

// Queries the reasoning model n times with the profile and the full roster;
// resolves every raw answer through the registry (one constrained re-ask per
// unresolved answer). Raises NoResolvableVote when nothing resolves.
SelectionOutcome recommend_model(LlmGateway& gateway, const Registry& registry, LibraryId library,
                                 const DatasetProfile& profile, const SelectorOptions& options);

// Plurality over the resolved votes; ties go to the earliest query.
std::string plurality_winner(const SelectionOutcome& outcome);

} // namespace adagent
