#include "adagent/processor.hpp"

#include "adagent/errors.hpp"
#include "adagent/util.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adagent {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Supervision s) {
    switch (s) {
        case Supervision::supervised_capable: return "supervised_capable";
        case Supervision::unsupervised_with_eval: return "unsupervised_with_eval";
        case Supervision::production: return "production";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (trim(train_path).empty())
        raise(Errc::UnparseableInstruction, "no training dataset path recovered");
    if (test_path && *test_path == train_path)
        raise(Errc::UnparseableInstruction, "train and test paths must differ");
    for (const auto& [k, v] : user_params)
        if (trim(k).empty()) raise(Errc::UnparseableInstruction, "empty parameter name");
}

std::string resolve_against_data_root(const std::string& path, const std::string& data_root) {
    const std::string p = trim(path);
    if (p.empty()) return p;
    if (p.find('/') != std::string::npos || p.find('\\') != std::string::npos) return p;
    std::string root = data_root.empty() ? std::string(".") : data_root;
    while (root.size() > 1 && root.back() == '/') root.pop_back();
    return root + "/" + p;
}

namespace {

bool looks_like_dataset_token(const std::string& token) {
    // a path-ish token: has an extension or a directory separator
    return token.find('.') != std::string::npos || token.find('/') != std::string::npos;
}

std::vector<std::string> split_model_list(const std::string& text) {
    // "VAE", "VAE and AE", "VAE, AE"
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        if (to_lower(word) == "and" || word == ",") {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
            continue;
        }
        if (!word.empty() && word.back() == ',') {
            cur += (cur.empty() ? "" : " ") + word.substr(0, word.size() - 1);
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
            continue;
        }
        cur += (cur.empty() ? "" : " ") + word;
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

} // namespace

std::optional<ExperimentConfig> rule_based_parse(const std::string& text) {
    std::string t = trim(text);
    if (t.empty()) return std::nullopt;

    ExperimentConfig config;

    // trailing "and evaluate" / "and optimize" requests, any order
    bool stripped = true;
    while (stripped) {
        stripped = false;
        for (const char* suffix : {"and evaluate", "then evaluate", "and optimize",
                                   "then optimize", "with evaluation", "with optimization"}) {
            const std::string s = suffix;
            if (t.size() > s.size() &&
                to_lower(t.substr(t.size() - s.size())) == s) {
                if (s.find("eval") != std::string::npos) config.evaluate = true;
                else config.optimize = true;
                t = trim(t.substr(0, t.size() - s.size()));
                stripped = true;
            }
        }
    }

    if (!starts_with_ci(t, "run ")) return std::nullopt;
    const std::string rest = trim(t.substr(4));
    // split at the last " on " so model names containing "on" stay intact
    const std::string lowered = to_lower(rest);
    const auto on_at = lowered.rfind(" on ");
    if (on_at == std::string::npos) return std::nullopt;

    const std::string model_part = trim(rest.substr(0, on_at));
    const std::string data_part = trim(rest.substr(on_at + 4));
    if (model_part.empty() || data_part.empty()) return std::nullopt;

    // "run anomaly detection on x.mat" leaves the choice to the selector
    static const char* kUnspecified[] = {"amodel", "anymodel",      "auto",
                                         "something", "anythingsuitable", "anomalydetection",
                                         "adetector", "asuitablemodel", "thebestmodel",
                                         "bestmodel"};
    const std::string squashed = squash_name(model_part);
    const bool unspecified =
        std::any_of(std::begin(kUnspecified), std::end(kUnspecified),
                    [&](const char* phrase) { return squashed == phrase; });
    if (!unspecified) config.algorithms = split_model_list(model_part);

    std::vector<std::string> files = split_model_list(data_part);
    if (files.empty() || !looks_like_dataset_token(files[0])) return std::nullopt;
    config.train_path = files[0];
    if (files.size() >= 2 && looks_like_dataset_token(files[1])) config.test_path = files[1];
    return config;
}

namespace {

ExperimentConfig config_from_llm_json(const std::string& content) {
    // the model may wrap the object in a code fence
    std::string body = trim(content);
    const auto brace = body.find('{');
    const auto close = body.rfind('}');
    if (brace == std::string::npos || close == std::string::npos || close < brace)
        raise(Errc::UnparseableInstruction, "parser reply holds no JSON object");
    json j;
    try {
        j = json::parse(body.substr(brace, close - brace + 1));
    } catch (const json::exception& e) {
        raise(Errc::UnparseableInstruction, std::string("parser reply is not valid JSON: ") + e.what());
    }
    ExperimentConfig config;
    for (const auto& a : j.value("algorithms", json::array()))
        config.algorithms.push_back(a.get<std::string>());
    config.train_path = j.value("train_path", "");
    const std::string test = j.value("test_path", "");
    if (!trim(test).empty()) config.test_path = test;
    if (j.contains("parameters") && j["parameters"].is_object())
        config.user_params = param_map_from_json(j["parameters"]);
    config.evaluate = j.value("evaluate", false);
    config.optimize = j.value("optimize", false);
    const std::string hint = j.value("modality_hint", "");
    if (!hint.empty()) config.modality_hint = modality_from_string(hint);
    return config;
}

constexpr const char* kParseSystemPrompt =
    "You convert one natural-language anomaly-detection command into JSON with fields: "
    "algorithms (array of model names, [] when unspecified), train_path (string), "
    "test_path (string, \"\" when absent), parameters (object of explicit hyperparameter "
    "constraints), evaluate (bool), optimize (bool), modality_hint (\"multivariate\", "
    "\"graph\", \"time_series\" or \"\" when the command does not state one). Reply with "
    "the JSON object only.";

} // namespace

ExperimentConfig parse_instruction(const std::string& text, LlmGateway* gateway,
                                   const ProcessorOptions& options) {
    if (trim(text).empty())
        raise(Errc::UnparseableInstruction, "empty command");

    std::optional<ExperimentConfig> config;
    if (gateway) {
        LLMRequest req;
        req.agent = AgentName::processor;
        req.model_id = options.chat_model;
        req.temperature = 0.0;
        req.messages.push_back({ChatRole::system, kParseSystemPrompt});
        req.messages.push_back({ChatRole::user, text});
        try {
            config = config_from_llm_json(gateway->complete(req).content);
        } catch (const AgentError& e) {
            if (e.code() != Errc::BackendUnavailable && e.code() != Errc::ReplayMiss &&
                e.code() != Errc::UnparseableInstruction)
                throw;
            // fall through to the pattern rule
        }
    }
    if (!config) config = rule_based_parse(text);
    if (!config)
        raise(Errc::UnparseableInstruction,
              "could not recover a dataset path from: " + trim(text));

    config->train_path = resolve_against_data_root(config->train_path, options.data_root);
    if (config->test_path)
        config->test_path = resolve_against_data_root(*config->test_path, options.data_root);
    config->validate();
    return *config;
}

LoadedDataset load_dataset(const fs::path& path) {
    LoadedDataset out;
    out.data = load_dataset_file(path, &out.evidence);

    DatasetProfile& p = out.profile;
    p.format = out.data.format;
    switch (out.data.format) {
        case DataFormat::graph_bundle: {
            const GraphData& g = *out.data.graph;
            p.modality = Modality::graph;
            p.n_samples = g.node_features.rows;
            p.n_features = g.node_features.cols;
            p.n_edges = g.edges.size();
            if (g.labels) {
                p.has_labels = true;
                double pos = 0;
                for (int v : *g.labels) pos += v;
                p.label_prevalence = pos / static_cast<double>(g.labels->size());
            }
            break;
        }
        case DataFormat::ts_bundle: {
            const TimeSeriesData& ts = *out.data.time_series;
            p.modality = Modality::time_series;
            p.n_samples = ts.train.rows;
            p.n_features = ts.train.cols;
            p.test_n_samples = ts.test.rows;
            p.test_has_labels = true;
            double pos = 0;
            for (int v : ts.test_labels) pos += v;
            p.test_label_prevalence = pos / static_cast<double>(ts.test_labels.size());
            break;
        }
        default: {
            const TabularData& t = *out.data.tabular;
            p.modality = Modality::multivariate; // provisional for ambiguous csv
            p.n_samples = t.x.rows;
            p.n_features = t.x.cols;
            if (t.labels) {
                p.has_labels = true;
                double pos = 0;
                for (int v : *t.labels) pos += v;
                p.label_prevalence = pos / static_cast<double>(t.labels->size());
            }
            break;
        }
    }
    return out;
}

Modality infer_modality(const ModalityEvidence& evidence, LlmGateway* gateway,
                        const ProcessorOptions& options, std::optional<Modality> user_hint) {
    // format-forced cases need no judgment
    if (evidence.format == DataFormat::graph_bundle) return Modality::graph;
    if (evidence.format == DataFormat::ts_bundle) return Modality::time_series;
    if (evidence.format != DataFormat::csv) return Modality::multivariate;
    if (!evidence.first_column_timeish) return Modality::multivariate;

    // ambiguous: a csv whose leading column looks like time
    const Modality rule_says = Modality::time_series;
    if (!gateway) return user_hint.value_or(rule_says);

    std::ostringstream prompt;
    prompt << "A CSV dataset has columns [";
    for (std::size_t i = 0; i < evidence.column_names.size(); ++i) {
        if (i) prompt << ", ";
        prompt << evidence.column_names[i];
    }
    prompt << "] and the first column begins with values [";
    for (std::size_t i = 0; i < evidence.sample_first_column.size(); ++i) {
        if (i) prompt << ", ";
        prompt << evidence.sample_first_column[i];
    }
    prompt << "]. Is this dataset multivariate tabular data or a time series? "
              "Answer with exactly one word: multivariate or time_series.";

    LLMRequest req;
    req.agent = AgentName::processor;
    req.model_id = options.chat_model;
    req.temperature = 0.0;
    req.messages.push_back(
        {ChatRole::system, "You classify dataset modality for anomaly detection."});
    req.messages.push_back({ChatRole::user, prompt.str()});

    std::optional<Modality> llm_says;
    try {
        const std::string answer = to_lower(trim(gateway->complete(req).content));
        if (answer.find("time") != std::string::npos) llm_says = Modality::time_series;
        else if (answer.find("multivariate") != std::string::npos)
            llm_says = Modality::multivariate;
    } catch (const AgentError& e) {
        if (e.code() != Errc::BackendUnavailable && e.code() != Errc::ReplayMiss) throw;
    }

    if (!llm_says) return user_hint.value_or(rule_says);
    if (*llm_says == rule_says) return rule_says;
    if (user_hint) return *user_hint;
    raise(Errc::AmbiguousModality,
          std::string("the format rule suggests ") + to_string(rule_says) +
              " but the model judged " + to_string(*llm_says) +
              "; rerun with the modality stated in the command");
}

DatasetProfile build_profile(const LoadedDataset& train, const LoadedDataset* test,
                             Modality modality) {
    DatasetProfile profile = train.profile;
    profile.modality = modality;
    if (test) {
        if (test->profile.n_features != profile.n_features)
            raise(Errc::DatasetMismatch,
                  "train has " + std::to_string(profile.n_features) + " features but test has " +
                      std::to_string(test->profile.n_features));
        profile.test_n_samples = test->profile.n_samples;
        profile.test_has_labels = test->profile.has_labels;
        profile.test_label_prevalence = test->profile.label_prevalence;
    }
    if (profile.has_labels) profile.supervision = Supervision::supervised_capable;
    else if (profile.test_has_labels) profile.supervision = Supervision::unsupervised_with_eval;
    else profile.supervision = Supervision::production;
    return profile;
}

} // namespace adagent
