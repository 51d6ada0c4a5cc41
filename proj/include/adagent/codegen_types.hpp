#pragma once

#include "adagent/dataio.hpp"
#include "adagent/registry.hpp"
#include "adagent/value.hpp"

#include <cstdint>
#include <string>

namespace adagent {

struct GeneratedScript {
    std::string model;
    LibraryId library{};
    std::string source_text;
    std::string output_path; // ./generated_scripts/<MODEL>_<stem>.py
    int revision = 0;
    ParamMap params_used;
};

enum class ReviewVerdict { pass, fail };
enum class ErrorCategory {
    none,
    import_error,
    missing_or_bad_argument,
    runtime_error,
    data_constraint_violation,
    timeout,
};

const char* to_string(ErrorCategory c);

struct ReviewResult {
    ReviewVerdict verdict = ReviewVerdict::fail;
    ErrorCategory error_category = ErrorCategory::runtime_error;
    std::string stderr_excerpt;
    std::string fix_hint; // reviewer-produced repair instruction; empty on pass
    double duration_s = 0.0;

    bool passed() const { return verdict == ReviewVerdict::pass; }
};

// Miniature modality-matched dataset for dry runs; deterministic per seed.
struct SyntheticSample {
    Dataset data;
    std::uint64_t seed = 0;
};

} // namespace adagent
