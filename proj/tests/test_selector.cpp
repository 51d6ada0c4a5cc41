#include "adagent/selector.hpp"

#include "adagent/errors.hpp"
#include "adagent/offline_stub.hpp"
#include "support/test_support.hpp"

#include "doctest.h"

using namespace adagent;

namespace {

DatasetProfile profile_of(Modality modality) {
    DatasetProfile profile;
    profile.modality = modality;
    profile.format = modality == Modality::graph        ? DataFormat::graph_bundle
                     : modality == Modality::time_series ? DataFormat::ts_bundle
                                                          : DataFormat::mat;
    profile.n_samples = 120;
    profile.n_features = 8;
    profile.has_labels = true;
    profile.label_prevalence = 0.1;
    return profile;
}

LlmGateway voting_gateway(TokenLedger& ledger, std::vector<std::string> votes) {
    RuleStubBackend::Options stub;
    stub.recommendation_votes = std::move(votes);
    return LlmGateway(std::make_shared<RuleStubBackend>(std::move(stub)), PriceTable::builtin(),
                      ledger);
}

} // namespace

TEST_CASE("select_library: modality routes to its library") {
    const Registry reg = Registry::builtin();
    CHECK(select_library(reg, profile_of(Modality::multivariate)) == LibraryId::pyod);
    CHECK(select_library(reg, profile_of(Modality::graph)) == LibraryId::pygod);
    CHECK(select_library(reg, profile_of(Modality::time_series)) == LibraryId::tslib);
}

TEST_CASE("recommend_model: three roster-valid votes, duplicates preserved") {
    const Registry reg = Registry::builtin();
    TokenLedger ledger("v");
    LlmGateway gateway = voting_gateway(ledger, {"VAE", "VAE", "AE1SVM"});

    const SelectionOutcome outcome =
        recommend_model(gateway, reg, LibraryId::pyod, profile_of(Modality::multivariate), {});
    CHECK(outcome.models == std::vector<std::string>{"VAE", "VAE", "AE1SVM"});
    CHECK(outcome.votes.size() == 3);
    for (const auto& vote : outcome.votes) {
        REQUIRE(vote.resolved.has_value());
        CHECK(reg.resolve_model(*vote.resolved)->library == LibraryId::pyod);
    }
    CHECK(plurality_winner(outcome) == "VAE");
    CHECK(ledger.entries().size() == 3); // no re-asks needed
}

TEST_CASE("recommend_model: three distinct votes tie-break to the first query") {
    const Registry reg = Registry::builtin();
    TokenLedger ledger("t");
    LlmGateway gateway = voting_gateway(ledger, {"LUNAR", "VAE", "AE1SVM"});
    const SelectionOutcome outcome =
        recommend_model(gateway, reg, LibraryId::pyod, profile_of(Modality::multivariate), {});
    CHECK(plurality_winner(outcome) == "LUNAR");
}

TEST_CASE("recommend_model: messy answers resolve, off-roster votes get one re-ask") {
    const Registry reg = Registry::builtin();

    SUBCASE("prose around the name still resolves") {
        TokenLedger ledger("p");
        LlmGateway gateway = voting_gateway(
            ledger, {"I suggest VAE.", "(deep) AE1SVM", "mo-gaal"});
        const SelectionOutcome outcome = recommend_model(
            gateway, reg, LibraryId::pyod, profile_of(Modality::multivariate), {});
        CHECK(outcome.models == std::vector<std::string>{"VAE", "AE1SVM", "MO-GAAL"});
    }
    SUBCASE("an off-roster answer is re-asked once and the re-answer counts") {
        TokenLedger ledger("r");
        // vote 1 resolves; vote 2 is garbage, its re-ask resolves; vote 3 resolves
        LlmGateway gateway = voting_gateway(
            ledger, {"VAE", "IsolationForest", "AE1SVM", "VAE"});
        SelectorOptions options;
        options.n_queries = 3;
        const SelectionOutcome outcome = recommend_model(
            gateway, reg, LibraryId::pyod, profile_of(Modality::multivariate), options);
        CHECK(outcome.models == std::vector<std::string>{"VAE", "AE1SVM", "VAE"});
        CHECK(ledger.entries().size() == 4); // 3 queries + 1 constrained re-ask
        CHECK(plurality_winner(outcome) == "VAE");
    }
}

TEST_CASE("recommend_model: nothing resolvable raises NoResolvableVote with the raw answers") {
    const Registry reg = Registry::builtin();
    TokenLedger ledger("n");
    LlmGateway gateway = voting_gateway(
        ledger, {"IsolationForest", "KNN", "LOF", "OCSVM", "HBOS", "ECOD"});
    SelectorOptions options;
    options.n_queries = 3;
    try {
        (void)recommend_model(gateway, reg, LibraryId::pyod, profile_of(Modality::multivariate),
                              options);
        FAIL("expected NoResolvableVote");
    } catch (const AgentError& e) {
        CHECK(e.code() == Errc::NoResolvableVote);
        CHECK(std::string(e.what()).find("IsolationForest") != std::string::npos);
    }
}

TEST_CASE("recommend_model: deterministic under replay") {
    TempDir dir("sel-replay");
    const Registry reg = Registry::builtin();
    const auto transcript = dir.path() / "t.jsonl";
    {
        RuleStubBackend::Options stub;
        stub.recommendation_votes = {"VAE", "AE", "VAE"};
        auto recording = std::make_shared<RecordingBackend>(
            std::make_shared<RuleStubBackend>(stub), transcript);
        TokenLedger ledger("rec");
        LlmGateway gateway(recording, PriceTable::builtin(), ledger);
        (void)recommend_model(gateway, reg, LibraryId::pyod, profile_of(Modality::multivariate),
                              {});
    }
    auto run_replay = [&] {
        TokenLedger ledger("rep");
        LlmGateway gateway(std::make_shared<ReplayBackend>(transcript), PriceTable::builtin(),
                           ledger);
        return recommend_model(gateway, reg, LibraryId::pyod, profile_of(Modality::multivariate),
                               {});
    };
    const SelectionOutcome a = run_replay();
    const SelectionOutcome b = run_replay();
    CHECK(a.models == b.models);
    CHECK(a.models == std::vector<std::string>{"VAE", "AE", "VAE"});
    CHECK(plurality_winner(a) == "VAE");
}
