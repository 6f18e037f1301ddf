#pragma once

#include <stdexcept>
#include <string>

namespace embmf {

// Error taxonomy mirrors the CLI exit codes: config -> 1, data -> 2,
// numeric -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or usage: unknown keys, invalid hyperparameters,
// missing required settings.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Bad input data: unreadable files, malformed lines, inconsistent
// dimensions between artifacts.
class DataError : public Error {
public:
    using Error::Error;
};

// Malformed text input; message carries file/line context.
class ParseError : public DataError {
public:
    using DataError::DataError;
};

// Numerical failure: singular systems, non-finite parameters.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace embmf
