// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace btforge {

/// Base class for all btforge errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a document cannot be turned into a behavior tree.
/// Carries the position (1-based line/column) where the problem was found.
class ParseError : public Error {
public:
    ParseError(std::string reason, std::size_t line, std::size_t column)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) +
                ": " + reason),
          reason_(std::move(reason)),
          line_(line),
          column_(column) {}

    const std::string& reason() const noexcept { return reason_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string reason_;
    std::size_t line_;
    std::size_t column_;
};

/// A node path did not resolve inside the tree it was applied to.
class PathError : public Error {
public:
    using Error::Error;
};

class ManifestError : public Error {
public:
    using Error::Error;
};

/// No well-formed <root> document could be located in raw model output.
class ExtractError : public Error {
public:
    using Error::Error;
};

/// Environment has no binding for a leaf the executor tried to tick.
class AdapterError : public Error {
public:
    using Error::Error;
};

class BindError : public Error {
public:
    using Error::Error;
};

class SuiteError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace btforge
