#include "adagent/info_miner.hpp"

#include "adagent/errors.hpp"
#include "adagent/offline_stub.hpp"
#include "adagent/util.hpp"

#include "doctest.h"

#include <chrono>

using namespace adagent;
using namespace std::chrono_literals;

namespace {

// The transcript structure the summarizer is instructed to emit.
const char* kVaeSummary = R"(The Variational detector reconstructs inputs and scores by error.

**Initialization Function (`__init__`):**
The constructor accepts the options below.
**Parameters:**
- `contamination`:
    - **Type**: float in (0., 0.5)
    - **Default**: 0.1
    - **Description**: The proportion of outliers in the data set.
- `encoder_neuron_list`:
    - **Type**: list of int
    - **Default**: [128, 64, 32]
    - **Description**: Encoder layer sizes.
- `n_features`:
    - **Type**: int
    - **Description**: Width of the input; required.
**Attributes:**
- `model`:
    - **Type**: torch.nn.Module
    - **Description**: The underlying network.
Use fit then decision_function.
**Python Dictionary of `__init__` Parameters with Default Values:**
```
{
    'contamination': 0.1,
    'encoder_neuron_list': [128, 64, 32],
}
```
)";

const ParamSpec* find_param(const ModelDocSummary& doc, const std::string& name) {
    for (const auto& p : doc.init_params)
        if (p.name == name) return &p;
    return nullptr;
}

} // namespace

TEST_CASE("parse_doc_summary: the structured transcript shape") {
    const ModelDocSummary doc = parse_doc_summary(kVaeSummary, "VAE", LibraryId::pyod);

    const ParamSpec* contamination = find_param(doc, "contamination");
    REQUIRE(contamination != nullptr);
    CHECK(contamination->type_text == "float in (0., 0.5)");
    REQUIRE(contamination->default_value.has_value());
    CHECK(*contamination->default_value == ParamValue(0.1));
    CHECK_FALSE(contamination->required());

    const ParamSpec* neurons = find_param(doc, "encoder_neuron_list");
    REQUIRE(neurons != nullptr);
    REQUIRE(neurons->default_value.has_value());
    const ParamValue expected(ParamValue::List{ParamValue(128), ParamValue(64), ParamValue(32)});
    CHECK(*neurons->default_value == expected);

    // a parameter documented without a default is required
    const ParamSpec* width = find_param(doc, "n_features");
    REQUIRE(width != nullptr);
    CHECK(width->required());

    REQUIRE(!doc.attributes.empty());
    CHECK(doc.attributes[0].name == "model");
    CHECK(doc.attributes[0].type_text == "torch.nn.Module");
    CHECK(doc.description.find("Variational") != std::string::npos);
}

TEST_CASE("parse_doc_summary: a bare defaults block still parses") {
    const char* bare =
        "**Python Dictionary of `__init__` Parameters with Default Values:**\n"
        "```\n{\n    'contamination': 0.1,\n    'epochs': 30,\n}\n```\n";
    const ModelDocSummary doc = parse_doc_summary(bare, "AE", LibraryId::pyod);
    REQUIRE(doc.init_params.size() == 2);
    CHECK(doc.init_params[0].name == "contamination");
    CHECK(doc.init_params[0].description.empty());
    CHECK(doc.init_params[1].name == "epochs");
    CHECK(*doc.init_params[1].default_value == ParamValue(std::int64_t{30}));
}

TEST_CASE("parse_doc_summary: duplicate names keep the last and warn") {
    const char* dup =
        "**Python Dictionary of `__init__` Parameters with Default Values:**\n"
        "```\n{\n    'lr': 0.01,\n    'lr': 0.001,\n}\n```\n";
    std::vector<std::string> warnings;
    const ModelDocSummary doc = parse_doc_summary(dup, "AE", LibraryId::pyod, &warnings);
    REQUIRE(doc.init_params.size() == 1);
    CHECK(*doc.init_params[0].default_value == ParamValue(0.001));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("lr") != std::string::npos);
}

TEST_CASE("parse_doc_summary: no extractable mapping raises NoParameterBlock") {
    try {
        (void)parse_doc_summary("free text about a detector, no structure", "AE", LibraryId::pyod);
        FAIL("expected NoParameterBlock");
    } catch (const AgentError& e) {
        CHECK(e.code() == Errc::NoParameterBlock);
    }
}

TEST_CASE("render/parse round-trip preserves init_params exactly") {
    Rng rng(404);
    for (int k = 0; k < 20; ++k) {
        ModelDocSummary doc;
        doc.model = "M" + std::to_string(k);
        doc.library = LibraryId::pyod;
        doc.description = "A detector.";
        const int n = 1 + static_cast<int>(rng.next_index(6));
        for (int i = 0; i < n; ++i) {
            ParamSpec p;
            p.name = "param_" + std::to_string(i);
            p.type_text = i % 2 ? "float" : "int";
            switch (rng.next_index(4)) {
                case 0: p.default_value = ParamValue(0.5 * static_cast<double>(i) + 0.25); break;
                case 1: p.default_value = ParamValue(static_cast<std::int64_t>(i * 7)); break;
                case 2:
                    p.default_value = ParamValue(
                        ParamValue::List{ParamValue(1), ParamValue(2), ParamValue(3)});
                    break;
                default: break; // required parameter
            }
            p.description = "Parameter " + std::to_string(i) + ".";
            doc.init_params.push_back(std::move(p));
        }

        const ModelDocSummary back =
            parse_doc_summary(render_doc_summary(doc), doc.model, doc.library);
        REQUIRE(back.init_params.size() == doc.init_params.size());
        for (std::size_t i = 0; i < doc.init_params.size(); ++i) {
            CHECK(back.init_params[i].name == doc.init_params[i].name);
            CHECK(back.init_params[i].default_value == doc.init_params[i].default_value);
            CHECK(back.init_params[i].type_text == doc.init_params[i].type_text);
        }
    }
}

TEST_CASE("render/parse round-trip keeps the canned docs field-identical") {
    for (LibraryId library : {LibraryId::pyod, LibraryId::pygod, LibraryId::tslib}) {
        const ModelDocSummary doc = RuleStubBackend::stub_doc(library, "VAE");
        const ModelDocSummary back =
            parse_doc_summary(render_doc_summary(doc), doc.model, doc.library);
        CHECK(docs_field_equal(back, doc));
    }
}

TEST_CASE("get_model_info: web path then cache path") {
    TempDir dir("miner");
    LongTermCache cache = LongTermCache::load(dir.path() / "c.json", 7);
    TokenLedger ledger("m");
    LlmGateway gateway(std::make_shared<RuleStubBackend>(), PriceTable::builtin(), ledger);
    const TimePoint now = std::chrono::system_clock::now();

    // cold cache: one web search, parsed doc, cache updated
    const MinedDoc first = get_model_info(gateway, cache, LibraryId::pyod, "VAE", now);
    CHECK(first.doc.source == DocSource::web);
    CHECK(first.search_latency_s == doctest::Approx(10.6));
    REQUIRE(find_param(first.doc, "contamination") != nullptr);
    CHECK(*find_param(first.doc, "contamination")->default_value == ParamValue(0.1));
    const ParamValue neurons(ParamValue::List{ParamValue(128), ParamValue(64), ParamValue(32)});
    CHECK(*find_param(first.doc, "encoder_neuron_list")->default_value == neurons);
    CHECK(cache.size() == 1);
    const std::size_t calls_after_web = gateway.ledger().entries().size();
    CHECK(calls_after_web == 1);

    // warm cache: zero gateway calls, field-identical doc
    const MinedDoc second = get_model_info(gateway, cache, LibraryId::pyod, "VAE", now + 1h);
    CHECK(second.doc.source == DocSource::cache);
    CHECK(second.search_latency_s == 0.0);
    CHECK(gateway.ledger().entries().size() == calls_after_web); // ledger delta is zero
    ModelDocSummary cached_as_web = second.doc;
    cached_as_web.source = first.doc.source;
    CHECK(docs_field_equal(cached_as_web, first.doc));

    // stale entry: the web path runs again
    const MinedDoc third = get_model_info(gateway, cache, LibraryId::pyod, "VAE", now + 24h * 8);
    CHECK(third.doc.source == DocSource::web);
    CHECK(gateway.ledger().entries().size() == calls_after_web + 1);
}

TEST_CASE("get_model_info: a format failure recovers through the stricter re-ask") {
    class JunkThenGood : public CompletionBackend {
    public:
        LLMResponse complete(const LLMRequest&) override {
            ++calls;
            if (calls == 1) return LLMResponse{"nothing structured", 10, 4, 0.5, 1};
            const ModelDocSummary doc = RuleStubBackend::stub_doc(LibraryId::pyod, "VAE");
            return LLMResponse{render_doc_summary(doc), 900, 250, 10.6, 1};
        }
        int calls = 0;
    };
    auto backend = std::make_shared<JunkThenGood>();
    TempDir dir("miner-retry");
    LongTermCache cache = LongTermCache::load(dir.path() / "c.json", 7);
    TokenLedger ledger("rt");
    LlmGateway gateway(backend, PriceTable::builtin(), ledger);

    const MinedDoc mined = get_model_info(gateway, cache, LibraryId::pyod, "VAE",
                                          std::chrono::system_clock::now());
    CHECK(backend->calls == 2);
    CHECK(mined.doc.source == DocSource::web);
    CHECK(find_param(mined.doc, "contamination") != nullptr);
    CHECK(cache.size() == 1); // the recovered doc is cached
}

TEST_CASE("get_model_info: unusable summaries exhaust the re-ask then fail") {
    class JunkBackend : public CompletionBackend {
    public:
        LLMResponse complete(const LLMRequest&) override {
            ++calls;
            return LLMResponse{"no structure here", 10, 4, 0.5, 1};
        }
        int calls = 0;
    };
    auto junk = std::make_shared<JunkBackend>();
    TempDir dir("miner-junk");
    LongTermCache cache = LongTermCache::load(dir.path() / "c.json", 7);
    TokenLedger ledger("j");
    LlmGateway gateway(junk, PriceTable::builtin(), ledger);

    try {
        (void)get_model_info(gateway, cache, LibraryId::pyod, "VAE",
                             std::chrono::system_clock::now());
        FAIL("expected DocumentationUnavailable");
    } catch (const AgentError& e) {
        CHECK(e.code() == Errc::DocumentationUnavailable);
    }
    CHECK(junk->calls == 2); // one search plus exactly one stricter re-ask
    CHECK(cache.size() == 0);
}
