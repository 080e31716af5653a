#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace lite {

/// Runtime/domain failure (maps to CLI exit status 1).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ParseErrorKind {
    UnknownLabel,
    FieldCount,
    NonInteger,
    NonNumber,
    OutOfRange,
    Header,
    Version,
    Truncated,
    NonFinite,
};

/// Malformed textual input. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(ParseErrorKind kind, std::string message, std::size_t line = 0)
        : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
          kind_(kind), line_(line), message_(std::move(message)) {}

    ParseErrorKind kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

    /// Same error re-attributed to an input line.
    ParseError at_line(std::size_t line) const { return ParseError(kind_, message_, line); }

private:
    ParseErrorKind kind_;
    std::size_t line_;
    std::string message_;
};

} // namespace lite
