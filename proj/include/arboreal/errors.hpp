#pragma once

#include <stdexcept>
#include <string>

namespace arboreal {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-square matrix where a square one is required.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Singular system in an exact solve; carries the rank that was reached.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& msg, std::size_t rank)
        : Error(msg), rank_(rank) {}
    std::size_t rank() const { return rank_; }

private:
    std::size_t rank_;
};

/// Request exceeds a hard enumeration limit (2^|E| scans, small-graph streams).
class SizeLimitError : public Error {
public:
    using Error::Error;
};

/// Structurally invalid edit, e.g. contracting a self-loop.
class InvalidOperationError : public Error {
public:
    using Error::Error;
};

/// Conditioning set contains a cycle, so the conditional measure is undefined.
class UndefinedConditioningError : public Error {
public:
    using Error::Error;
};

/// Event with a cyclic required set passed where acyclicity is a precondition.
class InvalidEventError : public Error {
public:
    using Error::Error;
};

/// Terminals lie in different components: effective resistance is infinite.
class DisconnectedError : public Error {
public:
    using Error::Error;
};

/// Symbolic (uniform beta) and per-edge numeric weights mixed in one call.
class ModeError : public Error {
public:
    using Error::Error;
};

/// Rejection sampler acceptance rate fell below the configured floor.
class TooDenseError : public Error {
public:
    using Error::Error;
};

/// Malformed input text; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

} // namespace arboreal
