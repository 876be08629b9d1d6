#pragma once

#include <stdexcept>
#include <string>

namespace lrl {

enum class Err {
    // configuration / input validation
    InvalidConfig,
    NonPositiveRadius,
    ZeroAngularMomentum,
    NonUnitDirection,
    RegimeUnsupported,
    ModelUnsupported,
    OutsideDomain,
    UnboundOrInvalid,
    UnreachableAngularMomentum,
    NoBoundStates,
    // numerical failures
    DerivativeUnavailable,
    NoPotentialDecomposition,
    EvaluationFailure,
    EmptyStateSample,
    StepFailure,
    NoTurningPoint,
    InsufficientTurningPoints,
    NoPerihelionFound,
    QuadratureBlowup,
    NonDifferentiableMagnitude,
    ZeroCoefficient,
    NoPositiveRoot,
};

const char* to_string(Err e);

// True for errors caused by bad inputs rather than by numerics giving up.
bool is_validation_error(Err e);

class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Err code() const { return code_; }

private:
    Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) { throw Error(code, what); }

}  // namespace lrl
