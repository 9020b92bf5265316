#pragma once

#include <stdexcept>
#include <string>

namespace pack {

// Base class for every error the engine raises on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad inputs: malformed files, unknown names, out-of-contract arguments.
// The CLI maps these to exit code 1.
struct InputError : Error {
    using Error::Error;
};

// Numerical failures inside a run. The CLI maps these to exit code 2.
struct NumericalError : Error {
    using Error::Error;
};

struct NonConvex : InputError {
    using InputError::InputError;
};
struct Degenerate : InputError {
    using InputError::InputError;
};
struct OutOfBounds : InputError {
    using InputError::InputError;
};
struct UnknownGroup : InputError {
    using InputError::InputError;
};

struct SingularLattice : NumericalError {
    using NumericalError::NumericalError;
};
struct NonPositiveKappa : NumericalError {
    using NumericalError::NumericalError;
};
struct ZeroConcentration : NumericalError {
    using NumericalError::NumericalError;
};
struct KappaUnderflow : NumericalError {
    using NumericalError::NumericalError;
};
struct DivergentRejection : NumericalError {
    using NumericalError::NumericalError;
};
struct SingularFisher : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace pack
