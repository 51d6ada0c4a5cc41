#include "adagent/info_miner.hpp"

#include "adagent/errors.hpp"
#include "adagent/util.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace adagent {

namespace {

constexpr const char* kDictHeader =
    "**Python Dictionary of `__init__` Parameters with Default Values:**";

// Pulls `name` out of "- `contamination`:" style bullet lines.
std::optional<std::string> bullet_name(const std::string& line) {
    const std::string t = trim(line);
    if (t.size() < 4 || t[0] != '-') return std::nullopt;
    const auto open = t.find('`');
    if (open == std::string::npos) return std::nullopt;
    const auto close = t.find('`', open + 1);
    if (close == std::string::npos) return std::nullopt;
    return t.substr(open + 1, close - open - 1);
}

// "- **Type**: float in (0., 0.5)" -> ("Type", "float in (0., 0.5)")
std::optional<std::pair<std::string, std::string>> field_line(const std::string& line) {
    const std::string t = trim(line);
    const auto open = t.find("**");
    if (open == std::string::npos) return std::nullopt;
    const auto close = t.find("**", open + 2);
    if (close == std::string::npos) return std::nullopt;
    const std::string key = t.substr(open + 2, close - open - 2);
    auto rest = t.substr(close + 2);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) return std::nullopt;
    return std::make_pair(key, trim(rest.substr(colon + 1)));
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    lines.push_back(cur);
    return lines;
}

bool is_section_header(const std::string& line, const char* name) {
    const std::string t = trim(line);
    return t.find("**") == 0 && t.find(name) != std::string::npos;
}

// Parses the fenced defaults dict; returns names in order plus values.
// Tolerates single/double/smart quotes and unquoted keys.
std::vector<std::pair<std::string, ParamValue>> parse_defaults_dict(
    const std::string& block, std::vector<std::string>* warnings) {
    std::vector<std::pair<std::string, ParamValue>> out;
    for (const std::string& raw_line : split_lines(block)) {
        std::string line = trim(raw_line);
        if (line.empty() || line == "{" || line == "}" || line[0] == '#') continue;
        if (!line.empty() && line.back() == ',') line.pop_back();
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string key = trim(line.substr(0, colon));
        while (!key.empty() && (key.front() == '\'' || key.front() == '"' || key.front() == '`'))
            key.erase(key.begin());
        while (!key.empty() && (key.back() == '\'' || key.back() == '"' || key.back() == '`'))
            key.pop_back();
        if (key.empty()) continue;
        const ParamValue value = ParamValue::parse_literal(trim(line.substr(colon + 1)));
        auto existing = std::find_if(out.begin(), out.end(),
                                     [&](const auto& kv) { return kv.first == key; });
        if (existing != out.end()) {
            existing->second = value; // later occurrence wins
            if (warnings)
                warnings->push_back("duplicate parameter '" + key + "' in defaults; kept the last");
        } else {
            out.emplace_back(key, value);
        }
    }
    return out;
}

struct SectionEntry {
    std::string type_text;
    std::optional<std::string> default_text;
    std::string description;
};

} // namespace

ModelDocSummary parse_doc_summary(const std::string& raw, const std::string& model,
                                  LibraryId library, std::vector<std::string>* warnings) {
    ModelDocSummary doc;
    doc.model = model;
    doc.library = library;
    doc.source = DocSource::web;

    const std::vector<std::string> lines = split_lines(raw);

    enum class Zone { preamble, params, attributes, tail };
    Zone zone = Zone::preamble;

    std::vector<std::pair<std::string, SectionEntry>> section_params;
    std::string current;
    std::string tail_text;
    std::string preamble_text;

    auto current_entry = [&]() -> SectionEntry* {
        if (current.empty()) return nullptr;
        for (auto& [name, entry] : section_params)
            if (name == current) return &entry;
        return nullptr;
    };
    AttributeSpec* current_attr = nullptr;

    // Everything from the dict header onwards is handled separately.
    std::size_t dict_header_at = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).find("**Python Dictionary") == 0) {
            dict_header_at = i;
            break;
        }
    }

    for (std::size_t i = 0; i < dict_header_at; ++i) {
        const std::string& line = lines[i];
        if (is_section_header(line, "Parameters:")) {
            zone = Zone::params;
            continue;
        }
        if (is_section_header(line, "Attributes:")) {
            zone = Zone::attributes;
            continue;
        }
        switch (zone) {
            case Zone::preamble: {
                // pure bold headers ("**Initialization Function ...**") are
                // structure, not description prose
                const std::string t = trim(line);
                if (t.rfind("**", 0) != 0) preamble_text += line + "\n";
                break;
            }
            case Zone::params: {
                if (auto name = bullet_name(line)) {
                    current = *name;
                    if (!current_entry()) section_params.emplace_back(current, SectionEntry{});
                    break;
                }
                if (auto field = field_line(line)) {
                    if (SectionEntry* entry = current_entry()) {
                        if (field->first == "Type") entry->type_text = field->second;
                        else if (field->first == "Default") entry->default_text = field->second;
                        else if (field->first == "Description") entry->description = field->second;
                        break;
                    }
                }
                if (!trim(line).empty()) tail_text += line + "\n";
                break;
            }
            case Zone::attributes: {
                if (auto name = bullet_name(line)) {
                    doc.attributes.push_back({*name, "", ""});
                    current_attr = &doc.attributes.back();
                    break;
                }
                if (auto field = field_line(line)) {
                    if (current_attr) {
                        if (field->first == "Type") current_attr->type_text = field->second;
                        else if (field->first == "Description")
                            current_attr->description = field->second;
                        break;
                    }
                }
                if (!trim(line).empty()) tail_text += line + "\n";
                break;
            }
            case Zone::tail:
                tail_text += line + "\n";
                break;
        }
    }

    // fenced dict after the header
    std::vector<std::pair<std::string, ParamValue>> defaults;
    if (dict_header_at < lines.size()) {
        std::string block;
        bool in_fence = false;
        bool saw_fence = false;
        for (std::size_t i = dict_header_at + 1; i < lines.size(); ++i) {
            const std::string t = trim(lines[i]);
            if (t.rfind("```", 0) == 0) {
                if (in_fence) break;
                in_fence = true;
                saw_fence = true;
                continue;
            }
            if (in_fence) block += lines[i] + "\n";
        }
        if (!saw_fence) {
            // tolerate a bare dict without a fence
            for (std::size_t i = dict_header_at + 1; i < lines.size(); ++i) block += lines[i] + "\n";
        }
        defaults = parse_defaults_dict(block, warnings);
    }

    // merge: the per-parameter sections carry the author's order; the dict
    // supplies (and overrides) defaults; dict-only names append at the end
    auto default_of = [&](const std::string& name) -> const ParamValue* {
        for (const auto& [n, value] : defaults)
            if (n == name) return &value;
        return nullptr;
    };
    for (const auto& [name, entry] : section_params) {
        ParamSpec p;
        p.name = name;
        p.type_text = entry.type_text;
        p.description = entry.description;
        if (const ParamValue* value = default_of(name)) p.default_value = *value;
        else if (entry.default_text && !entry.default_text->empty())
            p.default_value = ParamValue::parse_literal(*entry.default_text);
        doc.init_params.push_back(std::move(p));
    }
    for (const auto& [name, value] : defaults) {
        const bool already =
            std::any_of(doc.init_params.begin(), doc.init_params.end(),
                        [&](const ParamSpec& p) { return p.name == name; });
        if (already) continue;
        ParamSpec p;
        p.name = name;
        p.default_value = value;
        doc.init_params.push_back(std::move(p));
    }

    if (doc.init_params.empty())
        raise(Errc::NoParameterBlock,
              "summary for " + model + " holds no extractable parameter mapping");

    doc.description = trim(preamble_text);
    doc.usage_notes = trim(tail_text);
    return doc;
}

std::string render_doc_summary(const ModelDocSummary& doc) {
    std::ostringstream out;
    if (!doc.description.empty()) out << doc.description << "\n\n";
    out << "**Initialization Function (`__init__`):**\n";
    out << "**Parameters:**\n";
    for (const auto& p : doc.init_params) {
        out << "- `" << p.name << "`:\n";
        if (!p.type_text.empty()) out << "    - **Type**: " << p.type_text << "\n";
        if (p.default_value) out << "    - **Default**: " << p.default_value->python_literal() << "\n";
        if (!p.description.empty()) out << "    - **Description**: " << p.description << "\n";
    }
    if (!doc.attributes.empty()) {
        out << "**Attributes:**\n";
        for (const auto& a : doc.attributes) {
            out << "- `" << a.name << "`:\n";
            if (!a.type_text.empty()) out << "    - **Type**: " << a.type_text << "\n";
            if (!a.description.empty()) out << "    - **Description**: " << a.description << "\n";
        }
    }
    if (!doc.usage_notes.empty()) out << doc.usage_notes << "\n";
    out << kDictHeader << "\n";
    out << "```\n{\n";
    for (const auto& p : doc.init_params) {
        if (!p.default_value) continue;
        out << "    '" << p.name << "': " << p.default_value->python_literal() << ",\n";
    }
    out << "}\n```\n";
    return out.str();
}

MinedDoc get_model_info(LlmGateway& gateway, LongTermCache& cache, LibraryId library,
                        const std::string& model, TimePoint now, const MinerOptions& options) {
    MinedDoc result;

    if (!options.force_web) {
        const CacheLookup cached = cache.lookup(library, model, now);
        if (cached.hit()) {
            result.doc = *cached.doc;
            return result;
        }
    }

    const std::string query = std::string(to_string(library)) + " " + model +
                              " __init__ parameters documentation";
    WebSearchSummary search = gateway.web_search_summarize(query, options.search_model);
    result.search_latency_s = search.latency_s;

    try {
        result.doc = parse_doc_summary(search.summary, model, library, &result.warnings);
    } catch (const AgentError& e) {
        if (e.code() != Errc::NoParameterBlock) throw;
        // one stricter re-ask, then give up
        WebSearchSummary second = gateway.web_search_summarize(
            query, options.search_model, AgentName::info_miner,
            "The previous summary lacked the final parameter dictionary. The fenced dict "
            "is mandatory.");
        result.search_latency_s += second.latency_s;
        try {
            result.doc = parse_doc_summary(second.summary, model, library, &result.warnings);
        } catch (const AgentError& inner) {
            if (inner.code() != Errc::NoParameterBlock) throw;
            raise(Errc::DocumentationUnavailable,
                  "no parseable parameter documentation for " + model + " after a re-ask");
        }
    }

    result.doc.retrieved_at = now;
    result.doc.source = DocSource::web;
    cache.store(CacheEntry{library, model, result.doc, now});
    return result;
}

} // namespace adagent
