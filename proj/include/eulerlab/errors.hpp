#pragma once

#include <stdexcept>
#include <string>

namespace eulerlab {

// Every failure mode the library reports deliberately, as opposed to plain
// std::logic_error for caller bugs. Each carries a formatted message; the few
// that have a useful payload (an index, a value) expose it as a field.

struct EulerLabError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateSonicPoint : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct RecursionBreakdown : EulerLabError {
    int index;
    RecursionBreakdown(const std::string& msg, int idx)
        : EulerLabError(msg + " (order " + std::to_string(idx) + ")"), index(idx) {}
};

struct IntegerNuError : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct NewtonDiverged : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct SingularJacobian : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct SonicCrossing : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct WindowExit : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct IllConditionedFit : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct PrecisionExhausted : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct NoSignChange : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct InsufficientData : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct PositivityLoss : EulerLabError {
    double tau;
    PositivityLoss(const std::string& msg, double t)
        : EulerLabError(msg + " at tau = " + std::to_string(t)), tau(t) {}
};

struct FitFailed : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct IntegerExponent : EulerLabError {
    using EulerLabError::EulerLabError;
};

struct NonDecayingTail : EulerLabError {
    using EulerLabError::EulerLabError;
};

}  // namespace eulerlab
