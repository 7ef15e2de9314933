#pragma once

#include <stdexcept>
#include <string>

namespace difffake {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input (manifest, landmark file). Carries the 1-based line
/// number when one is known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Malformed or incompatible binary file (bad magic, version, truncation).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Degenerate geometry such as a hull over collinear points.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Shape or length disagreement between inputs.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Input data that violates a documented contract.
class DataError : public Error {
public:
    using Error::Error;
};

} // namespace difffake
