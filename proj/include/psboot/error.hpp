#pragma once

#include <stdexcept>
#include <string>

namespace psboot {

/// Bad input: out-of-range parameter, dimension mismatch, malformed file.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures of the numerics themselves (CLI exit status 2).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPsdError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateInputError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

namespace detail {
inline void require(bool ok, const std::string& what)
{
    if (!ok) throw ValidationError(what);
}
}  // namespace detail

}  // namespace psboot
