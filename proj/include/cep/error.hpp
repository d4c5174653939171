#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cep {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Location of a diagnostic inside a rule file. Offsets are in bytes.
struct SourceSpan {
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const SourceSpan&) const = default;
};

class ParseError : public Error {
public:
    enum class Kind { Syntax, Semantic };

    ParseError(Kind kind, SourceSpan span, const std::string& message)
        : Error(message), kind_(kind), span_(span) {}

    Kind kind() const noexcept { return kind_; }
    const SourceSpan& span() const noexcept { return span_; }

private:
    Kind kind_;
    SourceSpan span_;
};

/// A value outside the mathematical domain of an operation (e.g. a probability > 1).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A query issued before a full pattern window is available.
class WindowError : public Error {
public:
    using Error::Error;
};

/// An instance too large for exhaustive enumeration.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Inconsistent shapes, missing labels, bad configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed data files; carries the 1-based line number when known.
class DataError : public Error {
public:
    DataError(const std::string& message, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Non-finite loss or gradient during optimisation.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace cep
