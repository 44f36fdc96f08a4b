#pragma once

#include <stdexcept>
#include <string>

namespace kprnn {

/// Base of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data, file format violations, I/O failures.
class DataError : public Error {
public:
    using Error::Error;
};

/// Invalid arguments or configuration supplied by the caller.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Non-finite values produced during training or inference.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace kprnn
