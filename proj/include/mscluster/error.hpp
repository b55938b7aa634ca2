#pragma once

#include <stdexcept>
#include <string>

namespace mscluster {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (JSONL, vector files, graph files, config).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input that is well-formed but violates a contract (duplicate ids, bad k, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Vector dimension disagreement.
class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Numerical failure, e.g. an exponential action that did not reach tolerance.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace mscluster
