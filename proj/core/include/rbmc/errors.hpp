#pragma once

#include <stdexcept>
#include <string>

namespace rbmc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Usage/configuration errors (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class InvalidStop : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Data/format errors (CLI exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

class EmptyInput : public DataError {
public:
    using DataError::DataError;
};

class ShapeError : public DataError {
public:
    using DataError::DataError;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class KeyError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

/// Numeric errors (CLI exit code 4).
class NumericError : public Error {
public:
    using Error::Error;
};

class DegenerateVector : public NumericError {
public:
    using NumericError::NumericError;
};

class MatrixError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace rbmc
