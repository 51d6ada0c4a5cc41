#pragma once

#include "adagent/registry.hpp"
#include "adagent/util.hpp"
#include "adagent/value.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace adagent {

enum class DocSource { cache, web };
const char* to_string(DocSource s);

struct ParamSpec {
    std::string name;
    std::string type_text;                   // e.g. "float in (0., 0.5)"
    std::optional<ParamValue> default_value; // absent <=> required
    std::string description;

    bool required() const { return !default_value.has_value(); }
};

struct AttributeSpec {
    std::string name;
    std::string type_text;
    std::string description;
};

// Structured documentation for one model: what the code generator needs to
// build a constructor call.
struct ModelDocSummary {
    std::string model;
    LibraryId library{};
    std::string description;
    std::vector<ParamSpec> init_params; // names unique
    std::vector<AttributeSpec> attributes;
    std::string usage_notes;
    DocSource source = DocSource::web;
    TimePoint retrieved_at{};

    ParamMap default_params() const; // params that carry defaults

    nlohmann::json to_json() const;
    static ModelDocSummary from_json(const nlohmann::json& j);
};

bool docs_field_equal(const ModelDocSummary& a, const ModelDocSummary& b);

} // namespace adagent
