#pragma once

#include <stdexcept>
#include <string>

namespace dnkpp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated (bad parameter, bad shape, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The dispersal kernel has no exponential moment in the requested direction,
/// so no finite minimal speed exists.
class MollisonFailure : public Error {
public:
    using Error::Error;
};

/// A case that is mathematically admissible but not covered by the theory the
/// library implements.
class Unsupported : public Error {
public:
    using Error::Error;
};

/// An iterative procedure failed to converge.
class NonConvergence : public Error {
public:
    using Error::Error;
};

/// NaN or Inf appeared in a state that must stay finite.
class NumericalBlowup : public Error {
public:
    using Error::Error;
};

/// A numerically certified inequality (sub/super-solution) does not hold.
class CertificationFailed : public Error {
public:
    CertificationFailed(const std::string& what, double location, double excess)
        : Error(what), location_(location), excess_(excess) {}

    double location() const noexcept { return location_; }
    double excess() const noexcept { return excess_; }

private:
    double location_;
    double excess_;
};

/// Configuration parsing error carrying the offending line (0 when not tied to a line).
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace dnkpp
