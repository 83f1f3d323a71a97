#ifndef FRACLEVEL_ERRORS_HPP
#define FRACLEVEL_ERRORS_HPP

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fraclevel {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation
/// (non-integrable exponent, negative order, singular evaluation, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A parameter set violates one of the level-derivative constraints.
/// The message names the violated constraint, e.g. "rho + r_2 <= 2 violated".
class AdmissibilityError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Caller misuse that is not a mathematical domain issue (bad index,
/// mismatched grids, malformed input text).
class UsageError : public Error {
public:
    using Error::Error;
};

/// A numerical method could not reach the requested accuracy.
class NumericalFailure : public Error {
public:
    NumericalFailure(const std::string& what, double achieved_bound)
        : Error(what + " (achieved bound " + format(achieved_bound) + ")"), achieved_bound_(achieved_bound) {}

    double achieved_bound() const noexcept { return achieved_bound_; }

private:
    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", v);
        return buf;
    }
    double achieved_bound_;
};

} // namespace fraclevel

#endif
