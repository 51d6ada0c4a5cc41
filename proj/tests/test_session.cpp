#include "adagent/session.hpp"

#include "adagent/errors.hpp"
#include "adagent/offline_stub.hpp"
#include "adagent/synth_data.hpp"
#include "support/test_support.hpp"

#include "doctest.h"

#include <sstream>

using namespace adagent;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> banner_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("=== ", 0) == 0) out.push_back(line);
    return out;
}

} // namespace

TEST_CASE("session: offline stub run produces a validated script and clean banners") {
    TempDir dir("sess-stub");
    test::write_cardio_fixture(dir.path());
    SessionOptions options = test::offline_session_options(dir.path());
    std::ostringstream out;
    options.out = &out;
    options.backend = BackendKind::live; // injected backend wins; no network happens

    test::CwdGuard cwd(dir.path());
    const SessionResult result = run_session(std::string("Run VAE on cardio.mat"), options);
    CHECK(result.exit_code == 0);
    CHECK(result.workspace->has_passing_script("VAE"));
    CHECK(fs::exists(dir.path() / "generated_scripts" / "VAE_cardio.py"));
    CHECK(result.generation_seconds > 0.0);

    // user-specified model: the outcome is the resolved list, no votes
    REQUIRE(result.workspace->selection_outcome().has_value());
    CHECK(result.workspace->selection_outcome()->models == std::vector<std::string>{"VAE"});
    CHECK(result.workspace->selection_outcome()->votes.empty());

    const std::vector<std::string> banners = banner_lines(out.str());
    REQUIRE(banners.size() >= 8);
    CHECK(banners[0] == "=== [Main] Starting full pipeline ===");
    CHECK(banners[1] == "=== [Processor] Processing user input ===");
    CHECK(out.str().find("Experiment Configuration:") != std::string::npos);
    CHECK(out.str().find("    Algorithm: ['VAE']") != std::string::npos);
    CHECK(out.str().find("    Training Dataset: ./data/cardio.mat") != std::string::npos);
    CHECK(out.str().find("Package name: pyod") != std::string::npos);
    CHECK(out.str().find("[Cache Updated] Stored new documentation for VAE") != std::string::npos);
}

TEST_CASE("session: record then replay reaches an identical end state") {
    TempDir dir("sess-rr");
    test::write_cardio_fixture(dir.path());
    const fs::path transcript =
        test::record_stub_session(dir.path(), "Run VAE on cardio.mat");

    auto replay_once = [&](const fs::path& scratch) {
        fs::create_directories(scratch / "data");
        fs::copy_file(dir.path() / "data" / "cardio.mat", scratch / "data" / "cardio.mat");
        SessionOptions options = test::offline_session_options(scratch);
        options.injected_backend.reset();
        options.backend = BackendKind::replay;
        options.transcript_path = transcript.string();
        std::ostringstream out;
        options.out = &out;
        test::CwdGuard cwd(scratch);
        SessionResult result = run_session(std::string("Run VAE on cardio.mat"), options);
        return std::make_pair(std::move(result), out.str());
    };

    TempDir scratch_a("sess-rr-a");
    TempDir scratch_b("sess-rr-b");
    auto [result_a, stdout_a] = replay_once(scratch_a.path());
    auto [result_b, stdout_b] = replay_once(scratch_b.path());

    CHECK(result_a.exit_code == 0);
    CHECK(result_b.exit_code == 0);
    CHECK(stdout_a == stdout_b); // byte-identical transcripts

    const SessionWorkspace& a = *result_a.workspace;
    const SessionWorkspace& b = *result_b.workspace;
    CHECK(a.selected_models() == b.selected_models());
    CHECK(a.latest_script("VAE")->source_text == b.latest_script("VAE")->source_text);
    CHECK(docs_field_equal(a.model_docs().at("VAE"), b.model_docs().at("VAE")));
    CHECK(ledger_entries_equal(a.ledger(), b.ledger()));
}

TEST_CASE("session: a replay miss on an unrecorded request fails the stage") {
    TempDir dir("sess-miss");
    test::write_cardio_fixture(dir.path());
    const fs::path transcript =
        test::record_stub_session(dir.path(), "Run VAE on cardio.mat");

    SessionOptions options = test::offline_session_options(dir.path());
    options.injected_backend.reset();
    options.backend = BackendKind::replay;
    options.transcript_path = transcript.string();
    std::ostringstream out, err;
    options.out = &out;
    options.err = &err;

    test::CwdGuard cwd(dir.path());
    // different model => different prompts => no recording; the rule-based
    // fallback still parses, but the miner stage has nothing to answer
    const SessionResult result = run_session(std::string("Run AE on cardio.mat"), options);
    CHECK(result.exit_code != 0);
    CHECK(err.str().find("ReplayMiss") != std::string::npos);
}

TEST_CASE("session: cache pre-warm skips the web search (dashed path)") {
    TempDir dir("sess-cache");
    test::write_cardio_fixture(dir.path());
    SessionOptions options = test::offline_session_options(dir.path());

    {
        test::CwdGuard cwd(dir.path());
        std::ostringstream first_out;
        SessionOptions first = options;
        first.out = &first_out;
        CHECK(run_session(std::string("Run VAE on cardio.mat"), first).exit_code == 0);
        CHECK(first_out.str().find("Querying documentation") != std::string::npos);
    }
    {
        test::CwdGuard cwd(dir.path());
        std::ostringstream second_out;
        SessionOptions second = options;
        second.out = &second_out;
        const SessionResult result =
            run_session(std::string("Run VAE on cardio.mat"), second);
        CHECK(result.exit_code == 0);
        CHECK(second_out.str().find("Querying documentation") == std::string::npos);
        CHECK(second_out.str().find("Found cached documentation for VAE") != std::string::npos);
        // no web search billed on the cached path
        for (const auto& entry : result.workspace->ledger().entries())
            CHECK(entry.web_search_calls == 0);
    }
}

TEST_CASE("session: stage errors exit nonzero with a cause") {
    TempDir dir("sess-errs");
    test::write_cardio_fixture(dir.path());

    SUBCASE("missing dataset fails in the processor") {
        SessionOptions options = test::offline_session_options(dir.path());
        std::ostringstream err;
        options.err = &err;
        test::CwdGuard cwd(dir.path());
        const SessionResult result =
            run_session(std::string("Run VAE on missing.mat"), options);
        CHECK(result.exit_code != 0);
        CHECK(err.str().find("MissingDataset") != std::string::npos);
    }
    SUBCASE("an unknown model aborts before code generation") {
        SessionOptions options = test::offline_session_options(dir.path());
        std::ostringstream err;
        options.err = &err;
        test::CwdGuard cwd(dir.path());
        const SessionResult result =
            run_session(std::string("Run IForest on cardio.mat"), options);
        CHECK(result.exit_code != 0);
        CHECK(err.str().find("UnknownModel") != std::string::npos);
        CHECK(result.workspace->scripts().empty()); // no generation happened
    }
    SUBCASE("a model from the wrong library is rejected") {
        SessionOptions options = test::offline_session_options(dir.path());
        std::ostringstream err;
        options.err = &err;
        test::CwdGuard cwd(dir.path());
        const SessionResult result =
            run_session(std::string("Run TimesNet on cardio.mat"), options);
        CHECK(result.exit_code != 0);
        CHECK(err.str().find("tslib") != std::string::npos);
    }
}

TEST_CASE("session: recommendation path picks the plurality winner") {
    TempDir dir("sess-reco");
    test::write_cardio_fixture(dir.path());
    RuleStubBackend::Options stub;
    stub.recommendation_votes = {"VAE", "AE1SVM", "VAE"};
    SessionOptions options = test::offline_session_options(dir.path(), stub);
    std::ostringstream out;
    options.out = &out;

    test::CwdGuard cwd(dir.path());
    const SessionResult result =
        run_session(std::string("Run anomaly detection on cardio.mat"), options);
    // no algorithm named: the selector recommends one
    CHECK(result.exit_code == 0);
    CHECK(result.workspace->selected_models() == std::vector<std::string>{"VAE"});
    REQUIRE(result.workspace->selection_outcome().has_value());
    CHECK(result.workspace->selection_outcome()->votes.size() == 3);
    CHECK(out.str().find("Vote 2: AE1SVM") != std::string::npos);
    CHECK(out.str().find("Selected algorithm: VAE") != std::string::npos);
}

TEST_CASE("session: evaluate flag populates a report and exit reflects it") {
    TempDir dir("sess-eval");
    test::write_cardio_fixture(dir.path());
    SessionOptions options = test::offline_session_options(dir.path());
    options.evaluate = true;
    std::ostringstream out;
    options.out = &out;

    test::CwdGuard cwd(dir.path());
    const SessionResult result = run_session(std::string("Run VAE on cardio.mat"), options);
    CHECK(result.exit_code == 0);
    REQUIRE(result.workspace->evaluations().count("VAE") == 1);
    const EvaluationReport& report = result.workspace->evaluations().at("VAE");
    CHECK(report.auroc.has_value());
    CHECK(out.str().find("AUROC: ") != std::string::npos);
    CHECK(fs::exists(dir.path() / "results" / "VAE_cardio_report.json"));
}

namespace {

class FixedWeightProposer final : public ParamProposer {
public:
    std::optional<ParamMap> propose(const std::vector<OptimizationTrial>&, const ModelDocSummary&,
                                    int index) override {
        if (index > 2) return std::nullopt;
        ParamMap params;
        params["contamination"] = ParamValue(index == 1 ? 0.15 : 0.05);
        return params;
    }
    ProposedBy kind() const override { return ProposedBy::stub; }
};

} // namespace

TEST_CASE("session: optimize tunes first, then the final evaluation uses the winner") {
    TempDir dir("sess-opt");
    test::write_cardio_fixture(dir.path());
    SessionOptions options = test::offline_session_options(dir.path());
    options.optimize = true;
    options.optimizer_budget = 2;
    FixedWeightProposer proposer;
    options.injected_proposer = &proposer;
    std::ostringstream out;
    options.out = &out;

    test::CwdGuard cwd(dir.path());
    const SessionResult result = run_session(std::string("Run VAE on cardio.mat"), options);
    CHECK(result.exit_code == 0);

    REQUIRE(result.workspace->trials().count("VAE") == 1);
    const auto& trials = result.workspace->trials().at("VAE");
    CHECK(trials.size() == 3); // initial + 2 proposals
    CHECK(trials[0].proposed_by == ProposedBy::initial);

    // the optimizer banner precedes the evaluator banner
    const auto opt_at = out.str().find("=== [Optimizer] Tuning hyperparameters for VAE ===");
    const auto eval_at = out.str().find("=== [Evaluator] Running pipeline for VAE ===");
    REQUIRE(opt_at != std::string::npos);
    REQUIRE(eval_at != std::string::npos);
    CHECK(opt_at < eval_at);

    REQUIRE(result.workspace->evaluations().count("VAE") == 1);
    CHECK(fs::exists(dir.path() / "results" / "VAE_cardio_trials.json"));
    CHECK(fs::exists(dir.path() / "results" / "VAE_cardio_report.json"));
}

TEST_CASE("session: parse failure on the pattern 'Run X on' with nothing parseable") {
    TempDir dir("sess-parse");
    SessionOptions options = test::offline_session_options(dir.path());
    std::ostringstream err;
    options.err = &err;
    test::CwdGuard cwd(dir.path());
    const SessionResult result = run_session(std::string("hello there"), options);
    CHECK(result.exit_code != 0);
    CHECK(err.str().find("UnparseableInstruction") != std::string::npos);
}
