#pragma once

#include <stdexcept>
#include <string>

namespace nlft {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input parameters (non-L2 powerlaw, non-finite cells, malformed spec).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A time or interval argument outside the admissible range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// An operation was called in a state its contract excludes
/// (no zero to track, zero present where an exponential fit was requested).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// An analytic identity failed beyond its rounding budget.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// Numerical non-convergence and its refinements.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// |Im z| * T outside the working range.
class OverflowError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// E(t, z) is (numerically) zero at the evaluation point.
class PoleProximityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Riccati integration left the closed unit disk.
class InstabilityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Phase increments along a grid too large to unwrap.
class AliasingError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The sampled domain does not capture enough decay.
class DomainTooSmallError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Argument-principle count changed under boundary refinement.
class BoundaryNearZeroError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// |theta_z| below the Newton floor (multiple or nearly multiple zero).
class DerivativeDegenerateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace nlft
