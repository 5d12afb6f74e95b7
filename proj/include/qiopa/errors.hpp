#pragma once

#include <stdexcept>
#include <string>

namespace qiopa {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller supplied something that cannot be valid (bad ranges, shapes).
struct ValidationError : Error {
    using Error::Error;
};
struct OutOfRangeError : ValidationError {
    using ValidationError::ValidationError;
};
struct LayoutMismatchError : ValidationError {
    using ValidationError::ValidationError;
};

// Inputs are fine but the numerics cannot deliver within the declared budget.
struct NumericalGuardError : Error {
    using Error::Error;
};
struct TruncationError : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct DimensionGuardError : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct DegenerateOutcomeError : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};
struct TailMassError : NumericalGuardError {
    using NumericalGuardError::NumericalGuardError;
};

}  // namespace qiopa
