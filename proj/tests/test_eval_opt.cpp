#include "adagent/eval_opt.hpp"

#include "adagent/errors.hpp"
#include "adagent/metrics.hpp"
#include "adagent/offline_stub.hpp"
#include "adagent/synth_data.hpp"
#include "support/test_support.hpp"

#include "doctest.h"

#include <algorithm>

using namespace adagent;
namespace fs = std::filesystem;

namespace {

struct PlantedFixture {
    TempDir dir{"evalopt"};
    fs::path train_path;
    TabularData data;
    EvalContext ctx;

    PlantedFixture() {
        data = make_planted_outliers(404);
        train_path = dir.path() / "planted.csv";
        write_csv_tabular(train_path, data.x, data.labels);

        const std::string params =
            R"({"contamination":0.1,"signal_features":4,"noise_weight":1.0})";
        ctx.script = test::make_stub_script("AE", LibraryId::pyod, train_path.string(),
                                            std::nullopt, params);
        ctx.config.algorithms = {"AE"};
        ctx.config.train_path = train_path.string();
        ctx.profile.modality = Modality::multivariate;
        ctx.profile.format = DataFormat::csv;
        ctx.profile.n_samples = data.x.rows;
        ctx.profile.n_features = data.x.cols;
        ctx.profile.has_labels = true;
        ctx.profile.label_prevalence =
            static_cast<double>(std::count(data.labels->begin(), data.labels->end(), 1)) /
            static_cast<double>(data.labels->size());
        ctx.dataset_name = "planted";
        ctx.objective = PrimaryMetric::auroc;
        ctx.truth_labels = data.labels;
        ctx.run.interpreter = test::python_interpreter();
        ctx.run.results_dir = (dir.path() / "results").string();
    }
};

// the documentation the optimizer constrains proposals against
ModelDocSummary tunable_doc() {
    ModelDocSummary doc = RuleStubBackend::stub_doc(LibraryId::pyod, "AE");
    ParamSpec weight;
    weight.name = "noise_weight";
    weight.type_text = "float in [0, 1]";
    weight.default_value = ParamValue(1.0);
    doc.init_params.push_back(weight);
    ParamSpec split;
    split.name = "signal_features";
    split.type_text = "int";
    split.default_value = ParamValue(4);
    doc.init_params.push_back(split);
    return doc;
}

class SequenceProposer final : public ParamProposer {
public:
    explicit SequenceProposer(std::vector<double> weights) : weights_(std::move(weights)) {}
    std::optional<ParamMap> propose(const std::vector<OptimizationTrial>&, const ModelDocSummary&,
                                    int trial_index) override {
        const std::size_t i = static_cast<std::size_t>(trial_index - 1);
        if (i >= weights_.size()) return std::nullopt;
        ParamMap params;
        params["noise_weight"] = ParamValue(weights_[i]);
        return params;
    }
    ProposedBy kind() const override { return ProposedBy::stub; }

private:
    std::vector<double> weights_;
};

} // namespace

TEST_CASE("run_pipeline: scores the configured set and parses the result file") {
    PlantedFixture fx;
    const PipelineRunResult result = run_pipeline(fx.ctx.script, fx.ctx.run);
    CHECK(result.scores.size() == fx.data.x.rows);
    CHECK(result.labels_pred.size() == fx.data.x.rows);
    const auto positives =
        std::count(result.labels_pred.begin(), result.labels_pred.end(), 1);
    CHECK(positives > 0); // contamination 0.1 flags the top decile
}

TEST_CASE("run_pipeline: failures raise RuntimeFailure with the cause") {
    PlantedFixture fx;

    SUBCASE("script crash on real data") {
        fx.ctx.script.source_text = "raise RuntimeError('only on real data')\n";
        try {
            (void)run_pipeline(fx.ctx.script, fx.ctx.run);
            FAIL("expected RuntimeFailure");
        } catch (const AgentError& e) {
            CHECK(e.code() == Errc::RuntimeFailure);
            CHECK(std::string(e.what()).find("only on real data") != std::string::npos);
        }
    }
    SUBCASE("exit 0 but no result file is malformed_output") {
        fx.ctx.script.source_text = "print('done')\n";
        try {
            (void)run_pipeline(fx.ctx.script, fx.ctx.run);
            FAIL("expected RuntimeFailure");
        } catch (const AgentError& e) {
            CHECK(e.code() == Errc::RuntimeFailure);
            CHECK(std::string(e.what()).find("malformed_output") != std::string::npos);
        }
    }
}

TEST_CASE("evaluate_pipeline: metrics when labels exist, report file written") {
    PlantedFixture fx;
    const EvaluationReport report = evaluate_pipeline(fx.ctx);
    REQUIRE(report.auroc.has_value());
    REQUIRE(report.auprc.has_value());
    REQUIRE(report.f1.has_value());
    CHECK(*report.auroc > 0.5); // the planted signal is detectable
    CHECK(report.n_test == fx.data.x.rows);
    CHECK(fs::exists(fs::path(fx.ctx.run.results_dir) / "AE_planted_report.json"));

    SUBCASE("without labels the report carries no metrics") {
        EvalContext unlabeled = fx.ctx;
        unlabeled.truth_labels.reset();
        const EvaluationReport plain = evaluate_pipeline(unlabeled);
        CHECK_FALSE(plain.has_metrics());
    }
}

TEST_CASE("prepare_assessment: split mode for labeled train+test, direct otherwise") {
    PlantedFixture fx;
    Dataset train;
    train.format = DataFormat::csv;
    train.tabular = fx.data;

    SUBCASE("single labeled set assesses directly with a warning") {
        const Assessment a = prepare_assessment(train, fx.ctx.config, fx.ctx.profile, 1);
        CHECK(a.direct);
        CHECK(a.labels == *fx.data.labels);
        REQUIRE(!a.warnings.empty());
        CHECK(a.warnings[0].find("overfit") != std::string::npos);
    }
    SUBCASE("labeled train plus labeled test carve a validation split") {
        ExperimentConfig config = fx.ctx.config;
        config.test_path = (fx.dir.path() / "test.csv").string();
        DatasetProfile profile = fx.ctx.profile;
        profile.test_has_labels = true;

        const Assessment a = prepare_assessment(train, config, profile, 1);
        CHECK_FALSE(a.direct);
        REQUIRE(a.data_override.has_value());
        REQUIRE(a.test_override.has_value());
        CHECK(fs::exists(*a.data_override));
        CHECK(fs::exists(*a.test_override));
        // 20% carve-out with both classes
        CHECK(a.labels.size() == fx.data.x.rows / 5);
        CHECK(std::count(a.labels.begin(), a.labels.end(), 1) > 0);
        CHECK(std::count(a.labels.begin(), a.labels.end(), 0) > 0);

        const Dataset val = load_dataset_file(*a.test_override);
        CHECK(val.tabular->x.rows == a.labels.size());
        CHECK(val.tabular->x.cols == fx.data.x.cols);
    }
}

TEST_CASE("optimize: a dominating proposer improves the metric monotonically") {
    PlantedFixture fx;
    Dataset train;
    train.format = DataFormat::csv;
    train.tabular = fx.data;
    const Assessment assessment = prepare_assessment(train, fx.ctx.config, fx.ctx.profile, 2);

    SequenceProposer proposer({0.8, 0.6, 0.4, 0.2, 0.0});
    const ModelDocSummary doc = tunable_doc();
    const OptimizeResult result = optimize(fx.ctx, doc, assessment, proposer, 5);

    REQUIRE(result.trials.size() == 6); // initial + 5 proposals
    for (std::size_t i = 0; i < result.trials.size(); ++i)
        CHECK(result.trials[i].index == static_cast<int>(i));
    CHECK(result.trials[0].proposed_by == ProposedBy::initial);

    // best-so-far never decreases, and the metric strictly improves overall
    double best_so_far = *result.trials[0].report.auroc;
    for (const auto& trial : result.trials) {
        const double m = *trial.report.auroc;
        best_so_far = std::max(best_so_far, m);
        CHECK(best_so_far >= *result.trials[0].report.auroc);
    }
    CHECK(result.after_metric >= result.before_metric);
    CHECK(result.after_metric > result.before_metric); // the planted signal rewards the sequence
    CHECK(result.best_params.at("noise_weight") == ParamValue(0.0));
    CHECK(fs::exists(fs::path(fx.ctx.run.results_dir) / "AE_planted_trials.json"));
}

TEST_CASE("optimize: a never-improving proposer falls back to trial 0") {
    PlantedFixture fx;
    Dataset train;
    train.format = DataFormat::csv;
    train.tabular = fx.data;
    const Assessment assessment = prepare_assessment(train, fx.ctx.config, fx.ctx.profile, 3);

    SequenceProposer worse({3.0, 5.0, 9.0}); // amplifying the noise only hurts
    const OptimizeResult result = optimize(fx.ctx, tunable_doc(), assessment, worse, 3);

    CHECK(result.best_index == 0);
    CHECK(result.best_params == fx.ctx.script.params_used);
    CHECK(result.after_metric == *result.trials[0].report.auroc);
    CHECK(result.after_metric >= result.before_metric); // the fixed-point case
}

TEST_CASE("optimize: unusable proposals consume budget without a trial") {
    PlantedFixture fx;
    Dataset train;
    train.format = DataFormat::csv;
    train.tabular = fx.data;
    const Assessment assessment = prepare_assessment(train, fx.ctx.config, fx.ctx.profile, 4);

    SequenceProposer partial({0.5}); // proposals for trial 2..3 come back empty
    const OptimizeResult result = optimize(fx.ctx, tunable_doc(), assessment, partial, 3);
    CHECK(result.trials.size() == 2); // initial + the single usable proposal
    CHECK(result.trials[1].index == 1);
    CHECK(result.warnings.size() >= 2); // two skipped trials recorded
}

TEST_CASE("llm proposer: parses a JSON reply, re-asks once, drops unknown names") {
    RuleStubBackend::Options stub;
    stub.optimizer_proposals = {"not json at all", R"({"noise_weight": 0.5, "alien": 1})"};
    TokenLedger ledger("opt");
    LlmGateway gateway(std::make_shared<RuleStubBackend>(stub), PriceTable::builtin(), ledger);
    auto proposer = make_llm_proposer(gateway, "gpt-4o");

    const auto proposal = proposer->propose({}, tunable_doc(), 1);
    REQUIRE(proposal.has_value());
    CHECK(proposal->size() == 1); // the undocumented name was dropped
    CHECK(proposal->at("noise_weight") == ParamValue(0.5));
    CHECK(ledger.entries().size() == 2); // initial ask + one re-ask
}
