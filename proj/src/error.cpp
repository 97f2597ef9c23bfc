#include "pac/error.hpp"

namespace pac {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::DuplicateEdge: return "DuplicateEdge";
        case ErrorCode::InvalidGraph: return "InvalidGraph";
        case ErrorCode::PathInvalid: return "PathInvalid";
        case ErrorCode::TooManyPaths: return "TooManyPaths";
        case ErrorCode::InvalidIntervention: return "InvalidIntervention";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
        case ErrorCode::Diverged: return "Diverged";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::OutcomeNotBinary: return "OutcomeNotBinary";
        case ErrorCode::MissingParent: return "MissingParent";
        case ErrorCode::TooManyMediators: return "TooManyMediators";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::UnresolvedUndirectedEdge: return "UnresolvedUndirectedEdge";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Schema: return "Schema";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Usage: return "Usage";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace pac
