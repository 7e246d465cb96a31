#pragma once

#include <stdexcept>
#include <string>

namespace aniso {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration (usage errors at the CLI level).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class UnknownProblem : public InvalidArgument {
public:
    explicit UnknownProblem(const std::string& name)
        : InvalidArgument("unknown problem '" + name + "'") {}
};

// Numerical failures. The CLI reports these with exit code 2.

class NumericalError : public Error {
public:
    using Error::Error;
};

class NonFiniteValue : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotZeroMean : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IntegralConditionViolated : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class MissingDerivatives : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class GridMismatch : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateStart : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientPoints : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonPositiveNorm : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace aniso
