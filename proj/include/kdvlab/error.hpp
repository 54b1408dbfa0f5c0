#pragma once

#include <stdexcept>
#include <string>

namespace kdv {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: schema violations, inadmissible nonlinearities, bad parameters.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The asymptotic model has no admissible solution for this configuration
/// (negative discriminant, dQ/dsigma changes sign, decay assertions fail).
class RegimeError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: quadrature non-convergence, blow-up, under-resolution.
class NumericalError : public Error {
public:
    using Error::Error;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond) throw ValidationError(what);
}

} // namespace kdv
