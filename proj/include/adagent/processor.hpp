#pragma once

#include "adagent/dataio.hpp"
#include "adagent/gateway.hpp"
#include "adagent/registry.hpp"
#include "adagent/value.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace adagent {

enum class Supervision { supervised_capable, unsupervised_with_eval, production };
const char* to_string(Supervision s);

// Structured intent parsed from the user's command.
struct ExperimentConfig {
    std::vector<std::string> algorithms; // empty = let the selector choose
    std::string train_path;
    std::optional<std::string> test_path;
    ParamMap user_params;
    bool evaluate = false;
    bool optimize = false;
    std::optional<Modality> modality_hint; // from the instruction, when stated

    void validate() const; // train/test distinct, param keys non-empty
};

struct DatasetProfile {
    Modality modality{};
    DataFormat format{};
    std::size_t n_samples = 0; // rows / nodes / train timesteps
    std::size_t n_features = 0;
    std::optional<std::size_t> n_edges; // graph only
    bool has_labels = false;            // labels on the profiled (training) data
    std::optional<double> label_prevalence;
    Supervision supervision = Supervision::production;
    std::optional<std::size_t> test_n_samples;
    bool test_has_labels = false;
    std::optional<double> test_label_prevalence;
};

struct ProcessorOptions {
    std::string data_root = "./data";
    std::string chat_model = "gpt-4o";
};

// Known chat-model ids the parser should treat as authoritative sources;
// everything else falls back to the pattern rule.
// -- instruction parsing ------------------------------------------------

// The deterministic pattern rule covering "Run <MODEL>[,<MODEL>...] on
// <FILE> [and <FILE>]" with optional "and evaluate"/"and optimize"
// suffixes. Returns nullopt when the pattern does not apply.
std::optional<ExperimentConfig> rule_based_parse(const std::string& text);

// LLM-backed parse with the rule as fallback when the gateway fails.
// Paths are normalized against options.data_root afterwards in both paths.
ExperimentConfig parse_instruction(const std::string& text, LlmGateway* gateway,
                                   const ProcessorOptions& options);

// Applies the data-root convention: a bare file name becomes
// "<data_root>/<name>"; anything already carrying a directory part is kept.
std::string resolve_against_data_root(const std::string& path, const std::string& data_root);

// -- dataset loading ----------------------------------------------------

struct LoadedDataset {
    Dataset data;
    DatasetProfile profile; // modality provisional until infer_modality ran
    ModalityEvidence evidence;
};

LoadedDataset load_dataset(const std::filesystem::path& path);

// Deterministic rule first; the LLM is consulted only for the ambiguous
// tabular case (a CSV with a timestamp-like leading column). Rule/LLM
// disagreement without a user hint raises AmbiguousModality.
Modality infer_modality(const ModalityEvidence& evidence, LlmGateway* gateway,
                        const ProcessorOptions& options,
                        std::optional<Modality> user_hint);

// Merges the train (and optional test) datasets into one profile, checking
// feature-width consistency, and derives the supervision tag.
DatasetProfile build_profile(const LoadedDataset& train, const LoadedDataset* test,
                             Modality modality);

} // namespace adagent
