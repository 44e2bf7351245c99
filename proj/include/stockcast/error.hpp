#pragma once

#include <stdexcept>
#include <string>

namespace stockcast {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument violates a documented precondition (bad size, out-of-range
/// hyperparameter, mismatched dimensions).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Input data is malformed or degenerate (CSV problems, constant columns,
/// non-increasing dates).
class DataError : public Error {
public:
    using Error::Error;
};

/// A computation produced non-finite values or otherwise broke down.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Serialized model or report is truncated, has the wrong version or
/// cannot be parsed.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A serialized model holds a different model kind than the one requested.
class ModelTypeError : public Error {
public:
    using Error::Error;
};

} // namespace stockcast
