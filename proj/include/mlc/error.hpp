#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlc {

/// Base for every recoverable failure raised by the toolchain.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number of the offending line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that breaks a domain invariant (ordering, rates, labels).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Training data that cannot produce a model (no labels, one class, ...).
class DatasetError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// An MlcConfig that cannot be deployed.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw ContractViolation(what);
}

} // namespace detail
} // namespace mlc
