#pragma once

#include "adagent/codegen_types.hpp"
#include "adagent/eval_types.hpp"
#include "adagent/gateway.hpp"
#include "adagent/model_doc.hpp"
#include "adagent/processor.hpp"
#include "adagent/selector.hpp"
#include "adagent/util.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace adagent {

// ---------------------------------------------------------------- workspace

// Per-session shared state. Stages write once in pipeline order; repair and
// optimization append revisions instead of overwriting. Single-threaded by
// contract (one session = one sequential pipeline).
class SessionWorkspace {
public:
    SessionWorkspace(std::string session_id, std::string raw_instruction)
        : ledger_(session_id), session_id_(std::move(session_id)),
          raw_instruction_(std::move(raw_instruction)) {}

    const std::string& session_id() const { return session_id_; }
    const std::string& raw_instruction() const { return raw_instruction_; }

    void set_config(ExperimentConfig config);
    void set_dataset_profile(DatasetProfile profile);
    void set_selected_library(LibraryId library);
    void set_selected_models(std::vector<std::string> models);
    void set_selection_outcome(SelectionOutcome outcome);
    void put_model_doc(const std::string& model, ModelDocSummary doc);
    void add_script_revision(const std::string& model, GeneratedScript script);
    void add_review(const std::string& model, ReviewResult review);
    void set_evaluation(const std::string& model, EvaluationReport report);
    void add_trial(const std::string& model, OptimizationTrial trial);

    const std::optional<ExperimentConfig>& config() const { return config_; }
    const std::optional<DatasetProfile>& dataset_profile() const { return profile_; }
    const std::optional<LibraryId>& selected_library() const { return library_; }
    const std::vector<std::string>& selected_models() const { return models_; }
    const std::optional<SelectionOutcome>& selection_outcome() const { return outcome_; }
    const std::map<std::string, ModelDocSummary>& model_docs() const { return docs_; }
    const std::map<std::string, std::vector<GeneratedScript>>& scripts() const { return scripts_; }
    const std::map<std::string, std::vector<ReviewResult>>& reviews() const { return reviews_; }
    const std::map<std::string, EvaluationReport>& evaluations() const { return evaluations_; }
    const std::map<std::string, std::vector<OptimizationTrial>>& trials() const { return trials_; }

    const GeneratedScript* latest_script(const std::string& model) const;
    bool has_passing_script(const std::string& model) const;

    TokenLedger& ledger() { return ledger_; }
    const TokenLedger& ledger() const { return ledger_; }

    // Names of the populated fields; grows monotonically over a session.
    std::set<std::string> populated_fields() const;

private:
    void require_selected(const std::string& model, const char* action) const;

    TokenLedger ledger_;
    std::string session_id_;
    std::string raw_instruction_;
    std::optional<ExperimentConfig> config_;
    std::optional<DatasetProfile> profile_;
    std::optional<LibraryId> library_;
    std::vector<std::string> models_;
    bool models_set_ = false;
    std::optional<SelectionOutcome> outcome_;
    std::map<std::string, ModelDocSummary> docs_;
    std::map<std::string, std::vector<GeneratedScript>> scripts_;
    std::map<std::string, std::vector<ReviewResult>> reviews_;
    std::map<std::string, EvaluationReport> evaluations_;
    std::map<std::string, std::vector<OptimizationTrial>> trials_;
};

// --------------------------------------------------------------- long-term

struct CacheEntry {
    LibraryId library{};
    std::string model;
    ModelDocSummary doc;
    TimePoint retrieved_at{};
};

enum class CacheMissReason { absent, stale };

struct CacheLookup {
    std::optional<ModelDocSummary> doc; // engaged on hit
    CacheMissReason miss_reason = CacheMissReason::absent;

    bool hit() const { return doc.has_value(); }
};

// Persistent documentation cache with TTL freshness. Shared across sessions:
// reads hit an in-memory snapshot, writes rewrite the JSON file atomically
// (last writer wins).
class LongTermCache {
public:
    static constexpr int kDefaultTtlDays = 7;

    // A missing file loads as an empty cache; a malformed one raises
    // CorruptFile.
    static LongTermCache load(std::filesystem::path storage_path,
                              int ttl_days = kDefaultTtlDays);

    CacheLookup lookup(LibraryId library, const std::string& model, TimePoint now) const;

    // Upserts and persists. Disk trouble degrades to an in-memory cache with
    // a warning (PersistenceFailure is recorded, not thrown).
    void store(const CacheEntry& entry);

    // Drops stale (or all) entries; returns the dropped keys. Persists.
    std::vector<std::pair<LibraryId, std::string>> prune(TimePoint now, bool all);

    std::size_t size() const;
    std::chrono::hours ttl() const { return ttl_; }
    const std::filesystem::path& storage_path() const { return storage_path_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    void persist();
    static std::string key_of(LibraryId library, const std::string& model);

    std::filesystem::path storage_path_;
    std::chrono::hours ttl_{24 * kDefaultTtlDays};
    std::map<std::string, CacheEntry> entries_;
    std::vector<std::string> warnings_;
    // unique_ptr keeps the cache movable (load returns by value)
    mutable std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
};

} // namespace adagent
