// errors.hpp - exception types shared by every qfridge module.
#pragma once

#include <stdexcept>
#include <string>

namespace qfridge {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. a Planck
/// factor at zero frequency).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Pointwise evaluation of a density that only exists as a distribution.
class SymbolicDensityError : public Error {
public:
    using Error::Error;
};

/// The requested closed form does not apply to these parameters.
class OutOfRegimeError : public Error {
public:
    using Error::Error;
};

/// Drive shape not supported by the requested operation.
class UnsupportedDriveError : public Error {
public:
    using Error::Error;
};

/// Any numerical failure: conditioning, truncation, quadrature accuracy,
/// integrator instability.
class NumericalError : public Error {
public:
    enum class Kind { Conditioning, Truncation, Accuracy, Integrator, NotConverged };

    NumericalError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Quadrature did not reach its tolerance; carries the achieved estimate.
class AccuracyError : public NumericalError {
public:
    AccuracyError(const std::string& what, double estimate, double error_bound)
        : NumericalError(Kind::Accuracy, what), estimate_(estimate), error_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

/// Floquet truncation too small; suggests a larger order.
class TruncationError : public NumericalError {
public:
    TruncationError(const std::string& what, int suggested_order)
        : NumericalError(Kind::Truncation, what), suggested_(suggested_order) {}

    int suggested_order() const noexcept { return suggested_; }

private:
    int suggested_;
};

}  // namespace qfridge
