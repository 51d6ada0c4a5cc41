#include "adagent/value.hpp"

#include "adagent/util.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace adagent {

namespace {

bool looks_integral(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

bool looks_real(const std::string& s) {
    if (s.empty()) return false;
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end && *end == '\0' && end != s.c_str();
}

std::string python_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

} // namespace

std::string ParamValue::python_literal() const {
    struct Visitor {
        std::string operator()(std::monostate) const { return "None"; }
        std::string operator()(bool b) const { return b ? "True" : "False"; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_double(d); }
        std::string operator()(const std::string& s) const { return python_quote(s); }
        std::string operator()(const List& l) const {
            std::string out = "[";
            for (std::size_t i = 0; i < l.size(); ++i) {
                if (i) out += ", ";
                out += l[i].python_literal();
            }
            return out + "]";
        }
    };
    return std::visit(Visitor{}, v_);
}

nlohmann::json ParamValue::to_json() const {
    struct Visitor {
        nlohmann::json operator()(std::monostate) const { return nullptr; }
        nlohmann::json operator()(bool b) const { return b; }
        nlohmann::json operator()(std::int64_t i) const { return i; }
        nlohmann::json operator()(double d) const { return d; }
        nlohmann::json operator()(const std::string& s) const { return s; }
        nlohmann::json operator()(const List& l) const {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& v : l) arr.push_back(v.to_json());
            return arr;
        }
    };
    return std::visit(Visitor{}, v_);
}

ParamValue ParamValue::from_json(const nlohmann::json& j) {
    if (j.is_null()) return ParamValue{};
    if (j.is_boolean()) return ParamValue(j.get<bool>());
    if (j.is_number_integer()) return ParamValue(j.get<std::int64_t>());
    if (j.is_number_float()) return ParamValue(j.get<double>());
    if (j.is_string()) return ParamValue(j.get<std::string>());
    if (j.is_array()) {
        List l;
        for (const auto& e : j) l.push_back(from_json(e));
        return ParamValue(std::move(l));
    }
    return ParamValue(j.dump());
}

ParamValue ParamValue::parse_literal(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) return ParamValue{};
    if (t == "None" || t == "null") return ParamValue{};
    if (t == "True" || t == "true") return ParamValue(true);
    if (t == "False" || t == "false") return ParamValue(false);
    if (looks_integral(t)) return ParamValue(static_cast<std::int64_t>(std::stoll(t)));
    if (looks_real(t)) return ParamValue(std::stod(t));
    if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
        List l;
        std::string inner = t.substr(1, t.size() - 2);
        std::size_t start = 0;
        int depth = 0;
        for (std::size_t i = 0; i <= inner.size(); ++i) {
            if (i == inner.size() || (inner[i] == ',' && depth == 0)) {
                const std::string piece = trim(inner.substr(start, i - start));
                if (!piece.empty()) l.push_back(parse_literal(piece));
                start = i + 1;
            } else if (inner[i] == '[') {
                ++depth;
            } else if (inner[i] == ']') {
                --depth;
            }
        }
        return ParamValue(std::move(l));
    }
    if (t.size() >= 2 && ((t.front() == '\'' && t.back() == '\'') ||
                          (t.front() == '"' && t.back() == '"'))) {
        return ParamValue(t.substr(1, t.size() - 2));
    }
    return ParamValue(t);
}

nlohmann::json param_map_to_json(const ParamMap& params) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [k, v] : params) obj[k] = v.to_json();
    return obj;
}

ParamMap param_map_from_json(const nlohmann::json& j) {
    ParamMap out;
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = ParamValue::from_json(it.value());
    return out;
}

std::string param_map_python(const ParamMap& params) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, v] : params) {
        if (!first) out += ", ";
        first = false;
        out += python_quote(k) + ": " + v.python_literal();
    }
    return out + "}";
}

} // namespace adagent
