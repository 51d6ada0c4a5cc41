#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adagent {

enum class LibraryId { pyod, pygod, tslib };
enum class Modality { multivariate, graph, time_series };
enum class PrimaryMetric { auroc, f1 };

const char* to_string(LibraryId id);
const char* to_string(Modality m);
const char* to_string(PrimaryMetric m);
std::optional<LibraryId> library_from_string(std::string_view s);
std::optional<Modality> modality_from_string(std::string_view s);

struct ModelEntry {
    std::string canonical;
    std::vector<std::string> aliases;
};

struct ExcludedModel {
    std::string name;
    std::string reason;
};

struct LibrarySpec {
    LibraryId id{};
    Modality modality{};
    PrimaryMetric primary_metric{};
    std::string min_version; // recorded, not enforced
    std::vector<ModelEntry> models;
    std::vector<std::string> datasets;
    std::vector<ExcludedModel> excluded;
};

struct ResolvedModel {
    LibraryId library{};
    std::string canonical;
};

// Static roster knowledge for the three supported libraries. Loaded from a
// JSON manifest; immutable afterwards, safe to share across threads.
class Registry {
public:
    // The manifest compiled into the binary.
    static Registry builtin();
    static Registry load_file(const std::filesystem::path& manifest);
    static Registry load_json_text(const std::string& text);

    const LibrarySpec& library(LibraryId id) const;
    const std::vector<LibrarySpec>& libraries() const { return libraries_; }

    // Canonicalizes via case/punctuation-insensitive alias matching.
    // nullopt = unknown (including explicitly excluded models).
    std::optional<ResolvedModel> resolve_model(std::string_view name) const;

    // Why a name is absent from the rosters, when the manifest says so.
    std::optional<std::string> exclusion_reason(std::string_view name) const;

    LibraryId library_for_modality(Modality m) const;

    bool is_dataset_of(LibraryId id, std::string_view dataset) const;

private:
    void validate() const;

    std::vector<LibrarySpec> libraries_;
};

} // namespace adagent
