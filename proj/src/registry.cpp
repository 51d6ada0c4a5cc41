#include "adagent/registry.hpp"

#include "adagent/errors.hpp"
#include "adagent/util.hpp"

#include "json.hpp"

#include <map>

namespace adagent {

using nlohmann::json;

const char* to_string(LibraryId id) {
    switch (id) {
        case LibraryId::pyod: return "pyod";
        case LibraryId::pygod: return "pygod";
        case LibraryId::tslib: return "tslib";
    }
    return "?";
}

const char* to_string(Modality m) {
    switch (m) {
        case Modality::multivariate: return "multivariate";
        case Modality::graph: return "graph";
        case Modality::time_series: return "time_series";
    }
    return "?";
}

const char* to_string(PrimaryMetric m) {
    return m == PrimaryMetric::auroc ? "auroc" : "f1";
}

std::optional<LibraryId> library_from_string(std::string_view s) {
    const std::string v = to_lower(s);
    if (v == "pyod") return LibraryId::pyod;
    if (v == "pygod") return LibraryId::pygod;
    if (v == "tslib") return LibraryId::tslib;
    return std::nullopt;
}

std::optional<Modality> modality_from_string(std::string_view s) {
    const std::string v = to_lower(s);
    if (v == "multivariate" || v == "tabular") return Modality::multivariate;
    if (v == "graph") return Modality::graph;
    if (v == "time_series" || v == "time series" || v == "timeseries")
        return Modality::time_series;
    return std::nullopt;
}

Registry Registry::load_file(const std::filesystem::path& manifest) {
    return load_json_text(read_text_file(manifest));
}

Registry Registry::load_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        raise(Errc::RegistryInvalid, std::string("manifest is not valid JSON: ") + e.what());
    }
    Registry reg;
    if (!doc.contains("libraries") || !doc["libraries"].is_array())
        raise(Errc::RegistryInvalid, "manifest lacks a 'libraries' array");
    for (const auto& lib : doc["libraries"]) {
        LibrarySpec spec;
        const auto id = library_from_string(lib.value("id", ""));
        if (!id) raise(Errc::RegistryInvalid, "unknown library id " + lib.value("id", ""));
        spec.id = *id;
        const auto modality = modality_from_string(lib.value("modality", ""));
        if (!modality) raise(Errc::RegistryInvalid, "bad modality for " + lib.value("id", ""));
        spec.modality = *modality;
        const std::string metric = lib.value("primary_metric", "");
        if (metric == "auroc")
            spec.primary_metric = PrimaryMetric::auroc;
        else if (metric == "f1")
            spec.primary_metric = PrimaryMetric::f1;
        else
            raise(Errc::RegistryInvalid, "bad primary_metric for " + lib.value("id", ""));
        spec.min_version = lib.value("min_version", "");
        for (const auto& m : lib.value("models", json::array())) {
            ModelEntry entry;
            if (m.is_string()) {
                entry.canonical = m.get<std::string>();
            } else {
                entry.canonical = m.value("name", "");
                for (const auto& a : m.value("aliases", json::array()))
                    entry.aliases.push_back(a.get<std::string>());
            }
            if (entry.canonical.empty())
                raise(Errc::RegistryInvalid, "model without a name in " + lib.value("id", ""));
            spec.models.push_back(std::move(entry));
        }
        for (const auto& d : lib.value("datasets", json::array()))
            spec.datasets.push_back(d.get<std::string>());
        for (const auto& e : lib.value("excluded", json::array()))
            spec.excluded.push_back({e.value("name", ""), e.value("reason", "")});
        reg.libraries_.push_back(std::move(spec));
    }
    reg.validate();
    return reg;
}

void Registry::validate() const {
    // Rosters must be pairwise disjoint under the alias normalization, or
    // resolve_model could not return a unique owner.
    std::map<std::string, std::string> seen; // squashed -> "lib/canonical"
    for (const auto& lib : libraries_) {
        for (const auto& m : lib.models) {
            std::vector<std::string> keys{squash_name(m.canonical)};
            for (const auto& a : m.aliases) keys.push_back(squash_name(a));
            for (const auto& k : keys) {
                const std::string owner = std::string(to_string(lib.id)) + "/" + m.canonical;
                auto [it, inserted] = seen.emplace(k, owner);
                if (!inserted && it->second != owner)
                    raise(Errc::AmbiguousName,
                          "'" + k + "' maps to both " + it->second + " and " + owner);
            }
        }
    }
}

const LibrarySpec& Registry::library(LibraryId id) const {
    for (const auto& lib : libraries_)
        if (lib.id == id) return lib;
    raise(Errc::RegistryInvalid, std::string("library ") + to_string(id) + " missing from manifest");
}

std::optional<ResolvedModel> Registry::resolve_model(std::string_view name) const {
    const std::string key = squash_name(name);
    if (key.empty()) return std::nullopt;
    for (const auto& lib : libraries_) {
        for (const auto& m : lib.models) {
            if (squash_name(m.canonical) == key) return ResolvedModel{lib.id, m.canonical};
            for (const auto& a : m.aliases)
                if (squash_name(a) == key) return ResolvedModel{lib.id, m.canonical};
        }
    }
    return std::nullopt;
}

std::optional<std::string> Registry::exclusion_reason(std::string_view name) const {
    const std::string key = squash_name(name);
    for (const auto& lib : libraries_)
        for (const auto& e : lib.excluded)
            if (squash_name(e.name) == key)
                return std::string(to_string(lib.id)) + ": " + e.reason;
    return std::nullopt;
}

LibraryId Registry::library_for_modality(Modality m) const {
    switch (m) {
        case Modality::multivariate: return LibraryId::pyod;
        case Modality::graph: return LibraryId::pygod;
        case Modality::time_series: return LibraryId::tslib;
    }
    raise(Errc::RegistryInvalid, "unmapped modality");
}

bool Registry::is_dataset_of(LibraryId id, std::string_view dataset) const {
    const auto& lib = library(id);
    for (const auto& d : lib.datasets)
        if (squash_name(d) == squash_name(dataset)) return true;
    return false;
}

} // namespace adagent
