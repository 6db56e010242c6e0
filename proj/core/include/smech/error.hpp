#pragma once

#include <stdexcept>
#include <string>

namespace smech {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A parameter or argument is outside its documented domain.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Coordinates or flat index outside the lattice.
class OutOfRange : public Error {
public:
    using Error::Error;
};

// No admissible K0 exists: the lattice is too coarse for the potential.
class InfeasibleModel : public Error {
public:
    using Error::Error;
};

// A Markov rate came out negative (|A| or |V| too large for the spacing).
class NegativeRate : public Error {
public:
    using Error::Error;
};

// Input to a Markov-only routine is not a generator.
class NotMarkov : public Error {
public:
    using Error::Error;
};

class DimensionCapExceeded : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Re(c0) t is too large for the e^{c0 t} amplification to be represented.
class ExponentCapExceeded : public Error {
public:
    ExponentCapExceeded(const std::string& what, double exponent)
        : Error(what), exponent_(exponent) {}
    double exponent() const noexcept { return exponent_; }

private:
    double exponent_;
};

// (i/hbar) H - L(pi/2) is not a multiple of the identity.
class NonConstantDiagonal : public Error {
public:
    NonConstantDiagonal(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, double error_estimate)
        : Error(what), error_estimate_(error_estimate) {}
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double error_estimate_;
};

class EigenvalueNotFound : public Error {
public:
    using Error::Error;
};

class ZeroProbabilityEvent : public Error {
public:
    using Error::Error;
};

// Configuration file problems; carries the offending key and line when known.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string key = {}, int line = -1)
        : Error(what), key_(std::move(key)), line_(line) {}
    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

}  // namespace smech
