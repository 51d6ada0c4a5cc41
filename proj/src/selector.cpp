#include "adagent/selector.hpp"

#include "adagent/errors.hpp"
#include "adagent/util.hpp"

#include <map>
#include <sstream>

namespace adagent {

LibraryId select_library(const Registry& registry, const DatasetProfile& profile) {
    return registry.library_for_modality(profile.modality);
}

namespace {

std::string roster_line(const LibrarySpec& lib) {
    std::string out;
    for (std::size_t i = 0; i < lib.models.size(); ++i) {
        if (i) out += ", ";
        out += lib.models[i].canonical;
    }
    return out;
}

std::string profile_line(const DatasetProfile& profile) {
    std::ostringstream out;
    out << "modality=" << to_string(profile.modality) << ", n_samples=" << profile.n_samples
        << ", n_features=" << profile.n_features;
    if (profile.n_edges) out << ", n_edges=" << *profile.n_edges;
    out << ", labels=" << (profile.has_labels ? "train" : profile.test_has_labels ? "test" : "none");
    if (profile.label_prevalence)
        out << ", anomaly_rate=" << format_double(*profile.label_prevalence);
    else if (profile.test_label_prevalence)
        out << ", anomaly_rate=" << format_double(*profile.test_label_prevalence);
    return out.str();
}

LLMRequest vote_request(const LibrarySpec& lib, const DatasetProfile& profile,
                        const SelectorOptions& options) {
    LLMRequest req;
    req.agent = AgentName::selector;
    req.model_id = options.reasoning_model;
    // reasoning model keeps the provider's default temperature
    req.messages.push_back(
        {ChatRole::system,
         "You recommend one anomaly-detection model from a fixed roster. Reply with the "
         "model name only."});
    std::ostringstream user;
    user << "Dataset: " << profile_line(profile) << ". Library: " << to_string(lib.id)
         << ". Available models: " << roster_line(lib)
         << ". Which single model is the best fit?";
    req.messages.push_back({ChatRole::user, user.str()});
    return req;
}

std::optional<std::string> resolve_in_library(const Registry& registry, LibraryId library,
                                              const std::string& raw) {
    // tolerate answers like "VAE (variational autoencoder)" or "I suggest VAE."
    const std::string cleaned = trim(raw);
    if (auto hit = registry.resolve_model(cleaned); hit && hit->library == library)
        return hit->canonical;
    // try the first word and the last word
    std::istringstream in(cleaned);
    std::vector<std::string> words;
    std::string w;
    while (in >> w) {
        while (!w.empty() && (w.back() == '.' || w.back() == ',' || w.back() == ')')) w.pop_back();
        while (!w.empty() && w.front() == '(') w.erase(w.begin());
        if (!w.empty()) words.push_back(w);
    }
    for (const auto& word : words) {
        if (auto hit = registry.resolve_model(word); hit && hit->library == library)
            return hit->canonical;
    }
    return std::nullopt;
}

} // namespace

SelectionOutcome recommend_model(LlmGateway& gateway, const Registry& registry, LibraryId library,
                                 const DatasetProfile& profile, const SelectorOptions& options) {
    const LibrarySpec& lib = registry.library(library);
    SelectionOutcome outcome;
    outcome.library = library;

    for (int q = 0; q < options.n_queries; ++q) {
        RecommendationVote vote;
        vote.query_index = q;
        LLMRequest req = vote_request(lib, profile, options);
        vote.raw_answer = gateway.complete(req).content;
        vote.resolved = resolve_in_library(registry, library, vote.raw_answer);

        if (!vote.resolved) {
            // one constrained re-ask, then the vote stays unresolved
            LLMRequest retry = req;
            retry.messages.push_back({ChatRole::assistant, vote.raw_answer});
            retry.messages.push_back(
                {ChatRole::user, "That is not in the roster. Answer with exactly one name "
                                 "from this list: " +
                                     roster_line(lib)});
            const std::string second = gateway.complete(retry).content;
            vote.resolved = resolve_in_library(registry, library, second);
            if (!vote.resolved && !trim(second).empty())
                vote.raw_answer += " / " + trim(second);
        }
        if (vote.resolved) outcome.models.push_back(*vote.resolved);
        outcome.votes.push_back(std::move(vote));
    }

    if (outcome.models.empty()) {
        std::string raws;
        for (const auto& v : outcome.votes) raws += (raws.empty() ? "" : " | ") + v.raw_answer;
        raise(Errc::NoResolvableVote,
              "no recommendation resolved against the " + std::string(to_string(library)) +
                  " roster; raw answers: " + raws);
    }
    return outcome;
}

std::string plurality_winner(const SelectionOutcome& outcome) {
    if (outcome.models.empty())
        raise(Errc::NoResolvableVote, "no resolved votes to pick a winner from");
    std::map<std::string, int> counts;
    for (const auto& m : outcome.models) ++counts[m];
    int best = 0;
    for (const auto& [name, count] : counts) best = std::max(best, count);
    // earliest vote among the plurality set wins
    for (const auto& m : outcome.models)
        if (counts[m] == best) return m;
    return outcome.models.front();
}

} // namespace adagent
