#pragma once

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace adagent {

// A hyperparameter value as it appears in documentation, user constraints and
// generated constructor calls: a scalar or a flat list of scalars. Integral
// defaults stay integers so the rendered call site reproduces the documented
// default syntactically (32, not 32.0).
class ParamValue {
public:
    using List = std::vector<ParamValue>;
    using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string, List>;

    ParamValue() = default;
    ParamValue(bool v) : v_(v) {}
    ParamValue(std::int64_t v) : v_(v) {}
    ParamValue(int v) : v_(static_cast<std::int64_t>(v)) {}
    ParamValue(double v) : v_(v) {}
    ParamValue(std::string v) : v_(std::move(v)) {}
    ParamValue(const char* v) : v_(std::string(v)) {}
    ParamValue(List v) : v_(std::move(v)) {}

    bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
    const Storage& storage() const { return v_; }

    bool operator==(const ParamValue& other) const = default;

    // Source-text forms. python_literal() is what generated scripts embed.
    std::string python_literal() const;

    nlohmann::json to_json() const;
    static ParamValue from_json(const nlohmann::json& j);

    // Best-effort parse of a documentation default ("0.1", "[128, 64, 32]",
    // "None", "'auto'"). Unquoted non-numeric text parses as a string.
    static ParamValue parse_literal(const std::string& text);

private:
    Storage v_;
};

using ParamMap = std::map<std::string, ParamValue>;

nlohmann::json param_map_to_json(const ParamMap& params);
ParamMap param_map_from_json(const nlohmann::json& j);

// Python dict literal, keys in map order: {'contamination': 0.1}
std::string param_map_python(const ParamMap& params);

} // namespace adagent
