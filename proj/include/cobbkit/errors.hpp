#pragma once

#include <stdexcept>
#include <string>

namespace cobbkit {

/// Base class for all cobbkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file: wrong field count, non-numeric value, bad schema.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed data that violates a geometric or semantic contract.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Invalid parameter or parameter combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace cobbkit
