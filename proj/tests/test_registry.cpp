#include "adagent/registry.hpp"

#include "adagent/errors.hpp"
#include "adagent/util.hpp"

#include "doctest.h"

#include <cstdlib>
#include <set>

using namespace adagent;

TEST_CASE("builtin manifest: roster sizes and primary metrics") {
    const Registry reg = Registry::builtin();
    CHECK(reg.library(LibraryId::pyod).models.size() == 10);
    CHECK(reg.library(LibraryId::pygod).models.size() == 9);
    CHECK(reg.library(LibraryId::tslib).models.size() == 10);
    CHECK(reg.library(LibraryId::pyod).primary_metric == PrimaryMetric::auroc);
    CHECK(reg.library(LibraryId::pygod).primary_metric == PrimaryMetric::auroc);
    CHECK(reg.library(LibraryId::tslib).primary_metric == PrimaryMetric::f1);

    CHECK(reg.library(LibraryId::pyod).datasets.size() == 17);
    CHECK(reg.library(LibraryId::pygod).datasets.size() == 5);
    CHECK(reg.library(LibraryId::tslib).datasets.size() == 5);
}

TEST_CASE("builtin manifest: the shipped assets file matches the embedded copy") {
    const char* root = std::getenv("AD_AGENT_REPO_ROOT");
    if (!root) return; // ctest sets it; a bare binary run skips the check
    const Registry shipped =
        Registry::load_file(std::filesystem::path(root) / "assets" / "registry.json");
    const Registry builtin = Registry::builtin();
    REQUIRE(shipped.libraries().size() == builtin.libraries().size());
    for (std::size_t i = 0; i < shipped.libraries().size(); ++i) {
        const LibrarySpec& a = shipped.libraries()[i];
        const LibrarySpec& b = builtin.libraries()[i];
        CHECK(a.id == b.id);
        CHECK(a.models.size() == b.models.size());
        CHECK(a.datasets == b.datasets);
    }
}

TEST_CASE("resolve_model: identity over every registered canonical name") {
    const Registry reg = Registry::builtin();
    std::size_t total = 0;
    for (const auto& lib : reg.libraries()) {
        for (const auto& model : lib.models) {
            ++total;
            const auto hit = reg.resolve_model(model.canonical);
            REQUIRE(hit.has_value());
            CHECK(hit->library == lib.id);
            CHECK(hit->canonical == model.canonical);
        }
    }
    CHECK(total == 29);
}

TEST_CASE("resolve_model: alias and punctuation tolerance") {
    const Registry reg = Registry::builtin();

    auto check = [&](const std::string& name, LibraryId lib, const std::string& canonical) {
        const auto hit = reg.resolve_model(name);
        REQUIRE_MESSAGE(hit.has_value(), name);
        CHECK(hit->library == lib);
        CHECK(hit->canonical == canonical);
    };
    check("VAE", LibraryId::pyod, "VAE");
    check("vae", LibraryId::pyod, "VAE");
    check("timesnet", LibraryId::tslib, "TimesNet");
    check("MO-GAAL", LibraryId::pyod, "MO-GAAL");
    check("mogaal", LibraryId::pyod, "MO-GAAL");
    check("mo_gaal", LibraryId::pyod, "MO-GAAL");
    check("AutoEncoder", LibraryId::pyod, "AE");
    check("anomalydae", LibraryId::pygod, "AnomalyDAE");

    CHECK_FALSE(reg.resolve_model("NotAModel").has_value());
    CHECK_FALSE(reg.resolve_model("").has_value());
}

TEST_CASE("resolve_model: the excluded PyGOD import failure stays unknown, with a reason") {
    const Registry reg = Registry::builtin();
    CHECK_FALSE(reg.resolve_model("DOMINANT").has_value());
    const auto reason = reg.exclusion_reason("DOMINANT");
    REQUIRE(reason.has_value());
    CHECK(reason->find("pygod") != std::string::npos);
    CHECK_FALSE(reg.exclusion_reason("VAE").has_value());
}

TEST_CASE("rosters are pairwise disjoint under alias normalization") {
    const Registry reg = Registry::builtin();
    std::set<std::string> seen;
    for (const auto& lib : reg.libraries()) {
        for (const auto& model : lib.models) {
            CHECK_MESSAGE(seen.insert(squash_name(model.canonical)).second, model.canonical);
            for (const auto& alias : model.aliases)
                CHECK_MESSAGE(seen.insert(squash_name(alias)).second, alias);
        }
    }
}

TEST_CASE("library_for_modality is total and injective") {
    const Registry reg = Registry::builtin();
    CHECK(reg.library_for_modality(Modality::multivariate) == LibraryId::pyod);
    CHECK(reg.library_for_modality(Modality::graph) == LibraryId::pygod);
    CHECK(reg.library_for_modality(Modality::time_series) == LibraryId::tslib);

    std::set<LibraryId> images{reg.library_for_modality(Modality::multivariate),
                               reg.library_for_modality(Modality::graph),
                               reg.library_for_modality(Modality::time_series)};
    CHECK(images.size() == 3);
}

TEST_CASE("manifest validation: colliding aliases are a registry bug") {
    const char* collision = R"({
      "libraries": [
        {"id": "pyod", "modality": "multivariate", "primary_metric": "auroc",
         "models": [{"name": "VAE"}], "datasets": []},
        {"id": "pygod", "modality": "graph", "primary_metric": "auroc",
         "models": [{"name": "GAAN", "aliases": ["vae"]}], "datasets": []},
        {"id": "tslib", "modality": "time_series", "primary_metric": "f1",
         "models": [{"name": "TimesNet"}], "datasets": []}
      ]})";
    try {
        (void)Registry::load_json_text(collision);
        FAIL("expected AmbiguousName");
    } catch (const AgentError& e) {
        CHECK(e.code() == Errc::AmbiguousName);
    }
}

TEST_CASE("is_dataset_of: benchmark roster membership") {
    const Registry reg = Registry::builtin();
    CHECK(reg.is_dataset_of(LibraryId::pyod, "cardio"));
    CHECK(reg.is_dataset_of(LibraryId::pygod, "weibo"));
    CHECK(reg.is_dataset_of(LibraryId::tslib, "MSL"));
    CHECK_FALSE(reg.is_dataset_of(LibraryId::pyod, "weibo"));
}
