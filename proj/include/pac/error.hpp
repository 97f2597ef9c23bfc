#pragma once

#include <stdexcept>
#include <string>

namespace pac {

enum class ErrorCode {
    CycleDetected,
    UnknownNode,
    DuplicateEdge,
    InvalidGraph,
    PathInvalid,
    TooManyPaths,
    InvalidIntervention,
    DimensionMismatch,
    NonFiniteLoss,
    NonFiniteGradient,
    Diverged,
    InsufficientData,
    OutcomeNotBinary,
    MissingParent,
    TooManyMediators,
    GridMismatch,
    SingularCovariance,
    UnresolvedUndirectedEdge,
    InvalidConfig,
    Schema,
    EmptyDataset,
    Io,
    Usage,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pac
