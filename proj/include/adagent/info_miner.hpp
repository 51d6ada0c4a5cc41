#pragma once

#include "adagent/gateway.hpp"
#include "adagent/memory.hpp"
#include "adagent/model_doc.hpp"
#include "adagent/registry.hpp"

#include <string>
#include <vector>

namespace adagent {

// Extracts structured documentation from a summarizer reply. The reply is
// expected to end with a fenced Python dict of constructor defaults; the
// per-parameter sections contribute types and descriptions. Fragments that
// do not parse degrade into usage_notes. Duplicate names: last wins, with a
// warning. Raises NoParameterBlock when no mapping is extractable at all.
ModelDocSummary parse_doc_summary(const std::string& raw, const std::string& model,
                                  LibraryId library, std::vector<std::string>* warnings = nullptr);

// Inverse of parse_doc_summary for prompt embedding:
// parse(render(doc)) preserves init_params exactly.
std::string render_doc_summary(const ModelDocSummary& doc);

struct MinerOptions {
    std::string search_model = "gpt-4o";
    bool force_web = false; // bypass the cache (refresh)
};

struct MinedDoc {
    ModelDocSummary doc;
    double search_latency_s = 0.0; // 0 on cache hits
    std::vector<std::string> warnings;
};

// Cache-first documentation acquisition. A fresh cache entry is returned
// without touching the gateway; otherwise one web search (plus at most one
// stricter re-ask) is parsed, stored and returned.
MinedDoc get_model_info(LlmGateway& gateway, LongTermCache& cache, LibraryId library,
                        const std::string& model, TimePoint now,
                        const MinerOptions& options = {});

} // namespace adagent
