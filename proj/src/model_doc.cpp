#include "adagent/model_doc.hpp"

#include "adagent/errors.hpp"

namespace adagent {

using nlohmann::json;

const char* to_string(DocSource s) { return s == DocSource::cache ? "cache" : "web"; }

ParamMap ModelDocSummary::default_params() const {
    ParamMap out;
    for (const auto& p : init_params)
        if (p.default_value) out[p.name] = *p.default_value;
    return out;
}

json ModelDocSummary::to_json() const {
    json j;
    j["model"] = model;
    j["library"] = to_string(library);
    j["description"] = description;
    json params = json::array();
    for (const auto& p : init_params) {
        json pj;
        pj["name"] = p.name;
        pj["type"] = p.type_text;
        if (p.default_value) pj["default"] = p.default_value->to_json();
        pj["required"] = p.required();
        pj["description"] = p.description;
        params.push_back(std::move(pj));
    }
    j["init_params"] = std::move(params);
    json attrs = json::array();
    for (const auto& a : attributes)
        attrs.push_back({{"name", a.name}, {"type", a.type_text}, {"description", a.description}});
    j["attributes"] = std::move(attrs);
    j["usage_notes"] = usage_notes;
    j["source"] = to_string(source);
    j["retrieved_at"] = to_iso8601_utc(retrieved_at);
    return j;
}

ModelDocSummary ModelDocSummary::from_json(const json& j) {
    ModelDocSummary doc;
    doc.model = j.value("model", "");
    const auto lib = library_from_string(j.value("library", ""));
    if (!lib) raise(Errc::CorruptFile, "model doc names an unknown library");
    doc.library = *lib;
    doc.description = j.value("description", "");
    for (const auto& pj : j.value("init_params", json::array())) {
        ParamSpec p;
        p.name = pj.value("name", "");
        p.type_text = pj.value("type", "");
        if (pj.contains("default")) p.default_value = ParamValue::from_json(pj["default"]);
        p.description = pj.value("description", "");
        doc.init_params.push_back(std::move(p));
    }
    for (const auto& aj : j.value("attributes", json::array()))
        doc.attributes.push_back(
            {aj.value("name", ""), aj.value("type", ""), aj.value("description", "")});
    doc.usage_notes = j.value("usage_notes", "");
    doc.source = j.value("source", "web") == "cache" ? DocSource::cache : DocSource::web;
    if (const auto t = parse_iso8601_utc(j.value("retrieved_at", ""))) doc.retrieved_at = *t;
    return doc;
}

bool docs_field_equal(const ModelDocSummary& a, const ModelDocSummary& b) {
    if (a.model != b.model || a.library != b.library || a.description != b.description ||
        a.usage_notes != b.usage_notes)
        return false;
    if (a.init_params.size() != b.init_params.size()) return false;
    for (std::size_t i = 0; i < a.init_params.size(); ++i) {
        const auto& pa = a.init_params[i];
        const auto& pb = b.init_params[i];
        if (pa.name != pb.name || pa.type_text != pb.type_text ||
            pa.description != pb.description || pa.default_value != pb.default_value)
            return false;
    }
    if (a.attributes.size() != b.attributes.size()) return false;
    for (std::size_t i = 0; i < a.attributes.size(); ++i) {
        const auto& aa = a.attributes[i];
        const auto& ab = b.attributes[i];
        if (aa.name != ab.name || aa.type_text != ab.type_text || aa.description != ab.description)
            return false;
    }
    return true;
}

} // namespace adagent
