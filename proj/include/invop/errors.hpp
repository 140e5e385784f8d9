#pragma once

#include <stdexcept>
#include <string>

namespace invop {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Shape or dimension-selection mismatch detected by an interface wrapper.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error(what) {}
};

/// Operation applied to an operand outside its domain (division by zero,
/// sqrt of a negative, indicator violations fed where finiteness is required).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// Inversion requested for an operator with a frequency/diagonal entry of
/// modulus below the singularity threshold, or for a non-invertible node.
class SingularOperatorError : public Error {
public:
    explicit SingularOperatorError(const std::string& what) : Error(what) {}
};

/// A capability (prox, gradient, adjoint, inverse) queried on a node that
/// does not provide it.
class CapabilityError : public Error {
public:
    explicit CapabilityError(const std::string& what) : Error(what) {}
};

/// Malformed configuration (JSON config files, CLI arguments).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Numerical failure at run time (CG stagnation, infeasible solver setup).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
};

} // namespace invop
