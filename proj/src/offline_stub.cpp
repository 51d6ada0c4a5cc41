#include "adagent/offline_stub.hpp"

#include "adagent/errors.hpp"
#include "adagent/info_miner.hpp"
#include "adagent/processor.hpp"
#include "adagent/util.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adagent {

using nlohmann::json;

namespace {

void replace_all(std::string& text, const std::string& from, const std::string& to) {
    std::size_t at = 0;
    while ((at = text.find(from, at)) != std::string::npos) {
        text.replace(at, from.size(), to);
        at += to.size();
    }
}

std::string line_value(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) == 0) return trim(line.substr(prefix.size()));
    }
    return "";
}

const std::string& last_user_content(const LLMRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it)
        if (it->role == ChatRole::user) return it->content;
    return request.messages.back().content;
}

// The self-contained pipeline the stub generator emits. Loaders cover the
// same formats the artifact stages samples in, so the identical script text
// runs on synthetic and real data.
constexpr const char* kPipelineTemplate = R"PY(#!/usr/bin/env python3
# __MODEL__ anomaly-detection pipeline (__LIBRARY__). Self-contained stdlib
# loaders; scores are standardized deviation magnitudes.
import csv
import json
import math
import os
import struct
import zipfile
import zlib
__FAULT_IMPORT__

TRAIN_PATH = __TRAIN__
TEST_PATH = __TEST__
RESULT_PATH = __RESULT__
PARAMS = json.loads(r'''__PARAMS_JSON__''')


def _mat_element(buf, pos):
    dtype, nbytes = struct.unpack_from("<II", buf, pos)
    if dtype >> 16:
        size = dtype >> 16
        return dtype & 0xFFFF, buf[pos + 4:pos + 4 + size], pos + 8
    payload = buf[pos + 8:pos + 8 + nbytes]
    return dtype, payload, pos + 8 + nbytes + ((8 - nbytes % 8) % 8)


def _mat_matrix(payload):
    pos = 0
    _, _, pos = _mat_element(payload, pos)
    _, dims_raw, pos = _mat_element(payload, pos)
    dims = struct.unpack("<%di" % (len(dims_raw) // 4), dims_raw)
    _, name_raw, pos = _mat_element(payload, pos)
    name = name_raw.rstrip(b"\x00").decode("ascii", "ignore")
    dtype, data, pos = _mat_element(payload, pos)
    fmt = {9: "d", 7: "f", 1: "b", 2: "B", 3: "h", 4: "H",
           5: "i", 6: "I", 12: "q", 13: "Q"}.get(dtype)
    if fmt is None or len(dims) != 2:
        return name, None
    rows, cols = dims
    count = rows * cols
    vals = struct.unpack("<%d%s" % (count, fmt), data[:count * struct.calcsize(fmt)])
    return name, [[float(vals[c * rows + r]) for c in range(cols)] for r in range(rows)]


def _read_mat(path):
    with open(path, "rb") as f:
        buf = f.read()
    if buf[126:128] != b"IM":
        raise ValueError("unsupported MAT byte order in %s" % path)
    pos, arrays = 128, {}
    while pos + 8 <= len(buf):
        dtype, payload, pos = _mat_element(buf, pos)
        if dtype == 15:
            payload = zlib.decompress(payload)
            dtype, payload, _ = _mat_element(payload, 0)
        if dtype != 14:
            continue
        name, mat = _mat_matrix(payload)
        if name and mat is not None:
            arrays[name] = mat
    return arrays


def _read_npy(buf):
    if buf[:6] != b"\x93NUMPY":
        raise ValueError("not an NPY payload")
    if buf[6] == 1:
        hlen = struct.unpack_from("<H", buf, 8)[0]
        off = 10 + hlen
        header = buf[10:off]
    else:
        hlen = struct.unpack_from("<I", buf, 8)[0]
        off = 12 + hlen
        header = buf[12:off]
    import ast
    meta = ast.literal_eval(header.decode("latin1"))
    fmt = {"<f8": "d", "<f4": "f", "<i8": "q", "<i4": "i", "<i2": "h",
           "|i1": "b", "|u1": "B", "|b1": "B", "<u4": "I", "<u8": "Q"}[meta["descr"]]
    shape = meta["shape"]
    count = 1
    for s in shape:
        count *= s
    vals = struct.unpack_from("<%d%s" % (count, fmt), buf, off)
    if len(shape) <= 1:
        return [[float(v)] for v in vals]
    rows, cols = shape
    if meta["fortran_order"]:
        return [[float(vals[c * rows + r]) for c in range(cols)] for r in range(rows)]
    return [[float(vals[r * cols + c]) for c in range(cols)] for r in range(rows)]


def _read_npz(path):
    arrays = {}
    with zipfile.ZipFile(path) as zf:
        for name in zf.namelist():
            key = name[:-4] if name.endswith(".npy") else name
            arrays[key] = _read_npy(zf.read(name))
    return arrays


def _read_csv_table(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ValueError("%s is empty" % path)
    header, body = rows[0], [r for r in rows[1:] if r]
    start = 0
    if header and header[0].strip().lower() in ("time", "timestamp", "date", "datetime", "ds"):
        start = 1
    label_col = None
    if header and header[-1].strip().lower() in ("label", "labels", "y"):
        label_col = len(header) - 1
    end = label_col if label_col is not None else len(header)
    table = [[float(cell) for cell in row[start:end]] for row in body]
    labels = [int(float(row[label_col])) for row in body] if label_col is not None else None
    return table, labels


def _labels_from(arrays):
    y = arrays.get("y") or arrays.get("Y")
    if y is None:
        return None
    return [int(row[0]) for row in y]


def _graph_rows(arrays):
    x = arrays.get("x") or arrays.get("X")
    e = arrays.get("edge_index") or []
    deg = [0.0] * len(x)
    if e and len(e) == 2 and len(e[0]) != 2:
        pairs = zip(e[0], e[1])
    else:
        pairs = ((row[0], row[1]) for row in e)
    for u, v in pairs:
        deg[int(u)] += 1.0
        deg[int(v)] += 1.0
    return [list(row) + [deg[i]] for i, row in enumerate(x)]


def load_table(path):
    if os.path.isdir(path):
        return _read_csv_table(os.path.join(path, "train.csv"))
    if path.endswith(".csv"):
        return _read_csv_table(path)
    if path.endswith(".mat"):
        arrays = _read_mat(path)
    elif path.endswith(".npz"):
        arrays = _read_npz(path)
    else:
        raise ValueError("unsupported dataset format: %s" % path)
    if "edge_index" in arrays:
        return _graph_rows(arrays), _labels_from(arrays)
    x = arrays.get("X") or arrays.get("x")
    if x is None:
        raise ValueError("no X array in %s" % path)
    return x, _labels_from(arrays)


def load_scored(train_path, test_path):
    if os.path.isdir(train_path):
        bundle = test_path if test_path and os.path.isdir(test_path) else train_path
        return _read_csv_table(os.path.join(bundle, "test.csv"))[0]
    if test_path:
        return load_table(test_path)[0]
    return None


def _column_stats(rows):
    n, d = len(rows), len(rows[0])
    means = [sum(r[j] for r in rows) / n for j in range(d)]
    var = [sum((r[j] - means[j]) ** 2 for r in rows) / n for j in range(d)]
    sds = [math.sqrt(v) if v > 1e-18 else 1.0 for v in var]
    return means, sds


def _score(rows, means, sds, params):
    d = len(means)
    split = int(params.get("signal_features", d))
    noise_w = float(params.get("noise_weight", 1.0))
    weights = [1.0 if j < split else noise_w for j in range(d)]
    wsum = sum(weights) or 1.0
    out = []
    for r in rows:
        acc = 0.0
        for j in range(d):
            z = (r[j] - means[j]) / sds[j]
            acc += weights[j] * z * z
        out.append(math.sqrt(acc / wsum))
    return out


def _quantile(values, q):
    vals = sorted(values)
    h = (len(vals) - 1) * q
    lo, hi = int(math.floor(h)), int(math.ceil(h))
    if lo == hi:
        return vals[lo]
    return vals[lo] * (hi - h) + vals[hi] * (h - lo)


def main():
    data_override = os.environ.get("AD_AGENT_DATA_OVERRIDE")
    test_override = os.environ.get("AD_AGENT_TEST_OVERRIDE")
    train_path = data_override or TRAIN_PATH
    if test_override:
        test_path = test_override
    elif data_override:
        test_path = data_override if os.path.isdir(data_override) else None
    else:
        test_path = TEST_PATH
    result_path = os.environ.get("AD_AGENT_RESULT_PATH", RESULT_PATH)
    params = dict(PARAMS)
    override = os.environ.get("AD_AGENT_PARAMS_OVERRIDE")
    if override:
        params.update(json.loads(override))
__FAULT_MAIN__
    x_train, _ = load_table(train_path)
    scored = load_scored(train_path, test_path)
    if scored is None:
        scored = x_train
    means, sds = _column_stats(x_train)
    scores = _score(scored, means, sds, params)
    contamination = float(params.get("contamination", 0.1))
    threshold = _quantile(scores, 1.0 - contamination)
    labels_pred = [1 if s > threshold else 0 for s in scores]
    directory = os.path.dirname(result_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(result_path, "w") as f:
        json.dump({"scores": scores, "labels_pred": labels_pred}, f)
    print("__MODEL__: scored %d samples" % len(scores))


if __name__ == "__main__":
    main()
)PY";

std::string fault_import_line(const std::string& model, LibraryId library,
                              RuleStubBackend::Fault fault) {
    if (fault != RuleStubBackend::Fault::wrong_import) return "";
    switch (library) {
        case LibraryId::pyod:
            return "from pyod.modelz." + to_lower(model) + " import " + model;
        case LibraryId::pygod:
            return "from pygod.detectorz import " + model;
        case LibraryId::tslib:
            return "from tslib.modelz." + model + " import Model";
    }
    return "";
}

std::string fault_main_lines(const std::string& model, RuleStubBackend::Fault fault) {
    switch (fault) {
        case RuleStubBackend::Fault::missing_argument:
            return "    def build_detector(n_features):\n"
                   "        return {\"n_features\": n_features}\n"
                   "    detector = build_detector()\n";
        case RuleStubBackend::Fault::data_constraint:
            return "    raise ValueError(\"binary targets required for the " + model +
                   " loss; got continuous values\")\n";
        case RuleStubBackend::Fault::infinite_loop:
            return "    while True:\n        pass\n";
        default:
            return "";
    }
}

} // namespace

std::string stub_pipeline_script(const std::string& model, LibraryId library,
                                 const std::string& train_path,
                                 const std::optional<std::string>& test_path,
                                 const std::string& params_json,
                                 RuleStubBackend::Fault fault) {
    std::string script = kPipelineTemplate;
    replace_all(script, "__MODEL__", model);
    replace_all(script, "__LIBRARY__", to_string(library));
    replace_all(script, "__TRAIN__", "\"" + train_path + "\"");
    replace_all(script, "__TEST__", test_path ? "\"" + *test_path + "\"" : "None");
    const std::string stem = std::filesystem::path(train_path).stem().string();
    replace_all(script, "__RESULT__", "\"./results/" + model + "_" + stem + "_result.json\"");
    replace_all(script, "__PARAMS_JSON__", params_json.empty() ? "{}" : params_json);
    replace_all(script, "__FAULT_IMPORT__", fault_import_line(model, library, fault));
    replace_all(script, "__FAULT_MAIN__", fault_main_lines(model, fault));
    return script;
}

ModelDocSummary RuleStubBackend::stub_doc(LibraryId library, const std::string& model) {
    ModelDocSummary doc;
    doc.model = model;
    doc.library = library;
    doc.description = "The " + model + " detector in " + to_string(library) +
                      " assigns each sample an anomaly score; higher scores mean more "
                      "anomalous. Fit it on the training data, then read the scores for "
                      "the data being screened.";

    auto param = [&](const std::string& name, const std::string& type,
                     std::optional<ParamValue> def, const std::string& descr) {
        ParamSpec p;
        p.name = name;
        p.type_text = type;
        p.default_value = std::move(def);
        p.description = descr;
        doc.init_params.push_back(std::move(p));
    };

    switch (library) {
        case LibraryId::pyod: {
            param("contamination", "float in (0., 0.5)", ParamValue(0.1),
                  "The proportion of outliers in the data set, used to set the decision "
                  "threshold.");
            if (model == "VAE") {
                param("encoder_neuron_list", "list of int",
                      ParamValue(ParamValue::List{ParamValue(128), ParamValue(64), ParamValue(32)}),
                      "Sizes of the encoder layers.");
                param("decoder_neuron_list", "list of int",
                      ParamValue(ParamValue::List{ParamValue(32), ParamValue(64), ParamValue(128)}),
                      "Sizes of the decoder layers.");
                param("latent_dim", "int", ParamValue(2), "Dimension of the latent space.");
            } else if (model == "DeepSVDD") {
                param("n_features", "int", std::nullopt,
                      "Number of input features; must match the training matrix width.");
                param("use_ae", "bool", ParamValue(false),
                      "Use an autoencoder variant of the objective.");
            } else if (model == "AE") {
                param("hidden_neuron_list", "list of int",
                      ParamValue(ParamValue::List{ParamValue(64), ParamValue(32)}),
                      "Sizes of the hidden layers.");
            }
            param("epoch_num", "int", ParamValue(30), "Training epochs.");
            param("lr", "float", ParamValue(0.001), "Learning rate.");
            doc.usage_notes = "Import from pyod.models." + to_lower(model) +
                              ", call fit(X_train), then read decision_scores_ or call "
                              "decision_function(X).";
            break;
        }
        case LibraryId::pygod: {
            param("contamination", "float in (0., 0.5)", ParamValue(0.1),
                  "The proportion of outlier nodes.");
            param("hid_dim", "int", ParamValue(64), "Hidden embedding width.");
            param("num_layers", "int", ParamValue(2), "Message-passing depth.");
            param("epoch", "int", ParamValue(100), "Training epochs.");
            if (model == "GAAN")
                param("noise_dim", "int", ParamValue(16),
                      "Width of the generator noise input. Targets must be binary.");
            doc.usage_notes = "Import from pygod.detector, call fit(graph) with a graph "
                              "whose node features are x and whose edges are edge_index.";
            break;
        }
        case LibraryId::tslib: {
            param("seq_len", "int", ParamValue(100), "Sliding window length.");
            param("d_model", "int", ParamValue(128), "Model width.");
            param("e_layers", "int", ParamValue(2), "Encoder depth.");
            param("train_epochs", "int", ParamValue(3), "Training epochs.");
            param("anomaly_ratio", "float", ParamValue(1.0),
                  "Assumed percentage of anomalous timesteps, used for thresholding.");
            doc.usage_notes = "The benchmark layout expects train.csv/test.csv plus "
                              "test_label.csv; fit on train, score each test timestep.";
            break;
        }
    }
    doc.attributes.push_back({"decision_scores_", "ndarray of shape (n_samples,)",
                              "Anomaly score of each training sample."});
    doc.attributes.push_back({"threshold_", "float",
                              "Decision threshold derived from the contamination."});
    doc.attributes.push_back({"labels_", "ndarray of 0/1",
                              "Binary labels of the training data under threshold_."});
    return doc;
}

LLMResponse RuleStubBackend::respond(const LLMRequest& request, std::string content,
                                     double latency) {
    LLMResponse resp;
    std::size_t prompt_chars = 0;
    for (const auto& m : request.messages) prompt_chars += m.content.size();
    resp.input_tokens = static_cast<std::int64_t>((prompt_chars + 3) / 4);
    resp.output_tokens = static_cast<std::int64_t>((content.size() + 3) / 4);
    resp.web_search_calls = request.web_search_enabled ? 1 : 0;
    resp.latency_s = latency;
    resp.content = std::move(content);
    return resp;
}

LLMResponse RuleStubBackend::complete(const LLMRequest& request) {
    const std::string& user = last_user_content(request);

    switch (request.agent) {
        case AgentName::processor: {
            if (user.rfind("A CSV dataset has columns", 0) == 0)
                return respond(request, options_.modality_answer, 0.6);
            json out;
            if (auto config = rule_based_parse(user)) {
                out["algorithms"] = config->algorithms;
                out["train_path"] = config->train_path;
                out["test_path"] = config->test_path.value_or("");
                out["parameters"] = param_map_to_json(config->user_params);
                out["evaluate"] = config->evaluate;
                out["optimize"] = config->optimize;
                out["modality_hint"] = "";
            } else {
                out = json::object();
            }
            return respond(request, out.dump(), 0.8);
        }

        case AgentName::selector: {
            std::lock_guard<std::mutex> lock(mu_);
            if (vote_cursor_ < options_.recommendation_votes.size())
                return respond(request, options_.recommendation_votes[vote_cursor_++], 1.4);
            // no scripted votes: first roster entry named in the prompt
            const auto at = user.find("Available models: ");
            std::string pick = "VAE";
            if (at != std::string::npos) {
                const auto start = at + std::string("Available models: ").size();
                const auto comma = user.find_first_of(",.", start);
                pick = trim(user.substr(start, comma - start));
            }
            return respond(request, pick, 1.4);
        }

        case AgentName::info_miner: {
            // query shape: "<library> <Model> __init__ parameters documentation"
            std::istringstream in(user);
            std::string lib_token, model_token;
            in >> lib_token >> model_token;
            const auto library = library_from_string(lib_token).value_or(LibraryId::pyod);
            const ModelDocSummary doc = stub_doc(library, model_token);
            double latency = options_.search_latency_pyod;
            if (library == LibraryId::pygod) latency = options_.search_latency_pygod;
            if (library == LibraryId::tslib) latency = options_.search_latency_tslib;
            return respond(request, render_doc_summary(doc), latency);
        }

        case AgentName::generator: {
            const std::string model = line_value(user, "Model: ");
            const auto library =
                library_from_string(line_value(user, "Library: ")).value_or(LibraryId::pyod);
            const std::string train = line_value(user, "Training data: ");
            const std::string test = line_value(user, "Test data: ");
            std::string params_json =
                line_value(user, "Constructor parameters (defaults after user overrides): ");
            if (params_json.empty()) params_json = "{}";

            // a required n_features gets filled from the profile line
            if (params_json.find("n_features") == std::string::npos) {
                const std::string width = line_value(user, "Feature count: ");
                const ModelDocSummary doc = stub_doc(library, model);
                const bool needs_width = std::any_of(
                    doc.init_params.begin(), doc.init_params.end(),
                    [](const ParamSpec& p) { return p.name == "n_features" && p.required(); });
                if (needs_width && !width.empty()) {
                    json pj = json::parse(params_json);
                    pj["n_features"] = std::stoll(width);
                    params_json = pj.dump();
                }
            }

            Fault fault = Fault::none;
            const std::string stem = std::filesystem::path(train).stem().string();
            auto spec = options_.faults.find(model + "@" + stem);
            if (spec == options_.faults.end()) spec = options_.faults.find(model);
            const bool is_repair = user.rfind("The previous script failed", 0) == 0;
            if (spec != options_.faults.end()) {
                if (!is_repair) fault = spec->second.fault;
                else if (!spec->second.repairable) fault = spec->second.fault;
            }
            const std::string script = stub_pipeline_script(
                model, library, train, test.empty() ? std::nullopt : std::optional(test),
                params_json, fault);
            return respond(request, "```python\n" + script + "```", 2.2);
        }

        case AgentName::reviewer: {
            const std::string category = line_value(user, "Failure category: ");
            std::string hint = "Regenerate the script and rerun the dry run.";
            if (category == "missing_or_bad_argument")
                hint = "Pass every required constructor argument; n_features comes from the "
                       "dataset profile.";
            else if (category == "import_error")
                hint = "Fix the import path to match the documented module layout.";
            else if (category == "data_constraint_violation")
                hint = "Validate the targets before fitting; the loss expects binary values.";
            else if (category == "timeout")
                hint = "Remove the unbounded loop and bound the training epochs.";
            return respond(request, hint, 0.6);
        }

        case AgentName::optimizer: {
            std::lock_guard<std::mutex> lock(mu_);
            if (proposal_cursor_ < options_.optimizer_proposals.size())
                return respond(request, options_.optimizer_proposals[proposal_cursor_++], 1.1);
            return respond(request, "{}", 1.1);
        }

        case AgentName::evaluator:
            return respond(request, "ok", 0.5);
    }
    raise(Errc::BackendUnavailable, "stub cannot answer this agent");
}

} // namespace adagent
