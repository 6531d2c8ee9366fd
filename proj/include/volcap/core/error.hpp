#pragma once

#include <stdexcept>
#include <string>

namespace volcap {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated operation precondition (dimension mismatch, bad index, ...).
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

/// Missing or unreadable file / inconsistent project inputs.
class InputError : public Error {
public:
    using Error::Error;
};

/// Malformed file content. Carries file and line for diagnostics.
class ParseError : public Error {
public:
    ParseError(const std::string& path, int line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what) {}
    explicit ParseError(const std::string& what) : Error(what) {}
};

/// File format version not supported by this build.
class VersionError : public Error {
public:
    using Error::Error;
};

/// Numerical failure (degenerate geometry, non-finite gradients, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace volcap
