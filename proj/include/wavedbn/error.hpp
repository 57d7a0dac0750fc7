#pragma once

#include <stdexcept>
#include <string>

namespace wavedbn {

/// Base class of every error raised by the library. The CLI maps the three
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition or input-validation failure (exit code 1).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A file could not be read, written or parsed (exit code 2).
class IoError : public Error {
public:
    using Error::Error;
};

/// NaN or Inf appeared in a computation (exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if(!condition)
        throw ValidationError(message);
}

} // namespace detail

} // namespace wavedbn
