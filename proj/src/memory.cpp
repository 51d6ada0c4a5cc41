#include "adagent/memory.hpp"

#include "adagent/errors.hpp"

#include <algorithm>

namespace adagent {

using nlohmann::json;

// ---------------------------------------------------------------- workspace

void SessionWorkspace::set_config(ExperimentConfig config) {
    if (config_) raise(Errc::StageOrderViolation, "config already set");
    config.validate();
    config_ = std::move(config);
}

void SessionWorkspace::set_dataset_profile(DatasetProfile profile) {
    if (!config_) raise(Errc::StageOrderViolation, "profile requires a config");
    if (profile_) raise(Errc::StageOrderViolation, "dataset profile already set");
    profile_ = std::move(profile);
}

void SessionWorkspace::set_selected_library(LibraryId library) {
    if (!profile_) raise(Errc::StageOrderViolation, "library selection requires a dataset profile");
    if (library_) raise(Errc::StageOrderViolation, "library already selected");
    library_ = library;
}

void SessionWorkspace::set_selected_models(std::vector<std::string> models) {
    if (!library_)
        raise(Errc::StageOrderViolation, "models cannot be selected before a library");
    if (models_set_) raise(Errc::StageOrderViolation, "models already selected");
    if (models.empty()) raise(Errc::TypeMismatch, "selected model list is empty");
    models_ = std::move(models);
    models_set_ = true;
}

void SessionWorkspace::set_selection_outcome(SelectionOutcome outcome) {
    if (!library_) raise(Errc::StageOrderViolation, "selection outcome requires a library");
    if (outcome_) raise(Errc::StageOrderViolation, "selection outcome already set");
    outcome_ = std::move(outcome);
}

void SessionWorkspace::require_selected(const std::string& model, const char* action) const {
    if (!models_set_)
        raise(Errc::StageOrderViolation, std::string(action) + " before model selection");
    if (std::find(models_.begin(), models_.end(), model) == models_.end())
        raise(Errc::TypeMismatch,
              std::string(action) + " for '" + model + "', which is not a selected model");
}

void SessionWorkspace::put_model_doc(const std::string& model, ModelDocSummary doc) {
    require_selected(model, "documentation stored");
    if (doc.model != model)
        raise(Errc::TypeMismatch, "doc is for '" + doc.model + "', not '" + model + "'");
    if (docs_.count(model)) raise(Errc::StageOrderViolation, "doc for " + model + " already set");
    docs_.emplace(model, std::move(doc));
}

void SessionWorkspace::add_script_revision(const std::string& model, GeneratedScript script) {
    require_selected(model, "script stored");
    auto& revisions = scripts_[model];
    if (!revisions.empty() && script.revision != revisions.back().revision + 1)
        raise(Errc::TypeMismatch,
              "script revision " + std::to_string(script.revision) + " does not follow " +
                  std::to_string(revisions.back().revision));
    if (revisions.empty() && script.revision != 0)
        raise(Errc::TypeMismatch, "first script revision must be 0");
    revisions.push_back(std::move(script));
}

void SessionWorkspace::add_review(const std::string& model, ReviewResult review) {
    require_selected(model, "review stored");
    reviews_[model].push_back(std::move(review));
}

void SessionWorkspace::set_evaluation(const std::string& model, EvaluationReport report) {
    require_selected(model, "evaluation stored");
    if (evaluations_.count(model))
        raise(Errc::StageOrderViolation, "evaluation for " + model + " already set");
    evaluations_.emplace(model, std::move(report));
}

void SessionWorkspace::add_trial(const std::string& model, OptimizationTrial trial) {
    require_selected(model, "trial stored");
    auto& history = trials_[model];
    if (trial.index != static_cast<int>(history.size()))
        raise(Errc::TypeMismatch, "trial indices must be dense from 0");
    history.push_back(std::move(trial));
}

const GeneratedScript* SessionWorkspace::latest_script(const std::string& model) const {
    auto it = scripts_.find(model);
    if (it == scripts_.end() || it->second.empty()) return nullptr;
    return &it->second.back();
}

bool SessionWorkspace::has_passing_script(const std::string& model) const {
    auto it = reviews_.find(model);
    if (it == reviews_.end() || it->second.empty()) return false;
    return it->second.back().passed() && latest_script(model) != nullptr;
}

std::set<std::string> SessionWorkspace::populated_fields() const {
    std::set<std::string> fields{"raw_instruction"};
    if (config_) fields.insert("config");
    if (profile_) fields.insert("dataset_profile");
    if (library_) fields.insert("selected_library");
    if (models_set_) fields.insert("selected_models");
    if (outcome_) fields.insert("selection_outcome");
    if (!docs_.empty()) fields.insert("model_docs");
    if (!scripts_.empty()) fields.insert("scripts");
    if (!reviews_.empty()) fields.insert("reviews");
    if (!evaluations_.empty()) fields.insert("evaluation");
    if (!trials_.empty()) fields.insert("optimization");
    if (!ledger_.entries().empty()) fields.insert("ledger");
    return fields;
}

// --------------------------------------------------------------- long-term

std::string LongTermCache::key_of(LibraryId library, const std::string& model) {
    return std::string(to_string(library)) + "/" + model;
}

LongTermCache LongTermCache::load(std::filesystem::path storage_path, int ttl_days) {
    LongTermCache cache;
    cache.storage_path_ = std::move(storage_path);
    if (ttl_days <= 0) raise(Errc::BadOptions, "cache ttl must be positive");
    cache.ttl_ = std::chrono::hours(24 * ttl_days);
    if (!std::filesystem::exists(cache.storage_path_)) return cache;

    json doc;
    try {
        doc = json::parse(read_text_file(cache.storage_path_));
    } catch (const json::exception& e) {
        raise(Errc::CorruptFile,
              "cache file " + cache.storage_path_.string() + " is not valid JSON: " + e.what());
    }
    // the file's ttl is advisory; the configured ttl governs this process
    const json stored_entries = doc.value("entries", json::object());
    for (const auto& [key, entry] : stored_entries.items()) {
        CacheEntry ce;
        ce.doc = ModelDocSummary::from_json(entry.value("doc", json::object()));
        ce.library = ce.doc.library;
        ce.model = ce.doc.model;
        const auto at = parse_iso8601_utc(entry.value("retrieved_at", ""));
        if (!at)
            raise(Errc::CorruptFile, "cache entry " + key + " has a bad retrieved_at timestamp");
        ce.retrieved_at = *at;
        ce.doc.retrieved_at = *at;
        cache.entries_[key] = std::move(ce);
    }
    return cache;
}

CacheLookup LongTermCache::lookup(LibraryId library, const std::string& model,
                                  TimePoint now) const {
    std::lock_guard<std::mutex> lock(*mu_);
    CacheLookup result;
    auto it = entries_.find(key_of(library, model));
    if (it == entries_.end()) {
        result.miss_reason = CacheMissReason::absent;
        return result;
    }
    if (now - it->second.retrieved_at > ttl_) {
        result.miss_reason = CacheMissReason::stale;
        return result;
    }
    ModelDocSummary doc = it->second.doc;
    doc.source = DocSource::cache;
    result.doc = std::move(doc);
    return result;
}

void LongTermCache::store(const CacheEntry& entry) {
    std::lock_guard<std::mutex> lock(*mu_);
    CacheEntry copy = entry;
    copy.doc.retrieved_at = entry.retrieved_at;
    entries_[key_of(entry.library, entry.model)] = std::move(copy);
    persist();
}

std::vector<std::pair<LibraryId, std::string>> LongTermCache::prune(TimePoint now, bool all) {
    std::lock_guard<std::mutex> lock(*mu_);
    std::vector<std::pair<LibraryId, std::string>> dropped;
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (all || now - it->second.retrieved_at > ttl_) {
            dropped.emplace_back(it->second.library, it->second.model);
            it = entries_.erase(it);
        } else {
            ++it;
        }
    }
    if (!dropped.empty()) persist();
    return dropped;
}

std::size_t LongTermCache::size() const {
    std::lock_guard<std::mutex> lock(*mu_);
    return entries_.size();
}

void LongTermCache::persist() {
    json doc;
    doc["version"] = 1;
    doc["ttl_days"] = static_cast<int>(ttl_.count() / 24);
    json entries = json::object();
    for (const auto& [key, entry] : entries_) {
        entries[key] = {{"doc", entry.doc.to_json()},
                        {"retrieved_at", to_iso8601_utc(entry.retrieved_at)}};
    }
    doc["entries"] = std::move(entries);
    try {
        atomic_write_file(storage_path_, doc.dump(2) + "\n");
    } catch (const AgentError& e) {
        // keep serving from memory; the next store retries
        warnings_.push_back(std::string("cache persistence failed: ") + e.what());
    }
}

} // namespace adagent
