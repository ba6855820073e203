#pragma once

#include <stdexcept>
#include <string>

namespace incnet {

// Error categories map 1:1 onto CLI exit codes (config=2, data=3, numeric=4).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

// Shape/dimension violations in tensor ops. Usually a config or wiring bug.
struct ShapeError : ConfigError {
    using ConfigError::ConfigError;
};

// Model-file errors, each distinct so callers can tell them apart.
struct BadMagicError : DataError {
    using DataError::DataError;
};
struct BadVersionError : DataError {
    using DataError::DataError;
};
struct TruncatedFileError : DataError {
    using DataError::DataError;
};
struct ChecksumError : DataError {
    using DataError::DataError;
};

}  // namespace incnet
