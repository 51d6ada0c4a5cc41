#include "adagent/errors.hpp"

namespace adagent {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::BackendUnavailable: return "BackendUnavailable";
        case Errc::ReplayMiss: return "ReplayMiss";
        case Errc::CorruptTranscript: return "CorruptTranscript";
        case Errc::SearchUnavailable: return "SearchUnavailable";
        case Errc::EmptyResult: return "EmptyResult";
        case Errc::StageOrderViolation: return "StageOrderViolation";
        case Errc::TypeMismatch: return "TypeMismatch";
        case Errc::PersistenceFailure: return "PersistenceFailure";
        case Errc::AmbiguousName: return "AmbiguousName";
        case Errc::UnknownModel: return "UnknownModel";
        case Errc::RegistryInvalid: return "RegistryInvalid";
        case Errc::UnparseableInstruction: return "UnparseableInstruction";
        case Errc::MissingDataset: return "MissingDataset";
        case Errc::UnsupportedFormat: return "UnsupportedFormat";
        case Errc::CorruptFile: return "CorruptFile";
        case Errc::EmptyDataset: return "EmptyDataset";
        case Errc::AmbiguousModality: return "AmbiguousModality";
        case Errc::DatasetMismatch: return "DatasetMismatch";
        case Errc::NoResolvableVote: return "NoResolvableVote";
        case Errc::NoParameterBlock: return "NoParameterBlock";
        case Errc::DocumentationUnavailable: return "DocumentationUnavailable";
        case Errc::PromptBudgetExceeded: return "PromptBudgetExceeded";
        case Errc::SandboxFailure: return "SandboxFailure";
        case Errc::RuntimeFailure: return "RuntimeFailure";
        case Errc::DegenerateLabels: return "DegenerateLabels";
        case Errc::ProposerFailure: return "ProposerFailure";
        case Errc::MissingMetric: return "MissingMetric";
        case Errc::BadOptions: return "BadOptions";
    }
    return "UnknownError";
}

} // namespace adagent
