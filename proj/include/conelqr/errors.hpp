#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace conelqr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class SymmetryError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    using Error::Error;
};

class NonFiniteError : public Error {
public:
    using Error::Error;
};

// A cone hypothesis failed at run time (phi undefined, empty dual fiber, ...).
class ConeAssumptionError : public Error {
public:
    using Error::Error;
};

// The dual fiber C_mu is empty, so it has no minimal element and phi(mu) is undefined.
class NoMinimalElementError : public ConeAssumptionError {
public:
    using ConeAssumptionError::ConeAssumptionError;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class InfeasibleStateError : public Error {
public:
    using Error::Error;
};

class NotConvergedError : public Error {
public:
    using Error::Error;
};

class ConfigurationError : public Error {
public:
    using Error::Error;
};

class InvarianceFailureError : public Error {
public:
    InvarianceFailureError(std::size_t step, const std::string& what)
        : Error("invariance failure at step " + std::to_string(step) + ": " + what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace conelqr
