#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adagent {

// One code per contract-level failure. Callers switch on the code; the
// message carries the human detail.
enum class Errc {
    // gateway
    BackendUnavailable,
    ReplayMiss,
    CorruptTranscript,
    SearchUnavailable,
    EmptyResult,
    // memory / workspace
    StageOrderViolation,
    TypeMismatch,
    PersistenceFailure,
    // registry
    AmbiguousName,
    UnknownModel,
    RegistryInvalid,
    // processor
    UnparseableInstruction,
    MissingDataset,
    UnsupportedFormat,
    CorruptFile,
    EmptyDataset,
    AmbiguousModality,
    DatasetMismatch,
    // selector
    NoResolvableVote,
    // info-miner
    NoParameterBlock,
    DocumentationUnavailable,
    // codegen
    PromptBudgetExceeded,
    SandboxFailure,
    // eval-opt
    RuntimeFailure,
    DegenerateLabels,
    ProposerFailure,
    MissingMetric,
    // cli
    BadOptions,
};

const char* errc_name(Errc code);

class AgentError : public std::runtime_error {
public:
    AgentError(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

// Transport-level hiccup inside the live backend. The gateway retries these
// once before surfacing BackendUnavailable.
class TransientBackendError : public std::runtime_error {
public:
    explicit TransientBackendError(const std::string& message) : std::runtime_error(message) {}
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw AgentError(code, message);
}

} // namespace adagent
