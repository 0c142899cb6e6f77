#pragma once

#include <stdexcept>
#include <string>

namespace binflux {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid multiplexer/detector/run configuration. The message names the
/// offending field.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Arguments outside an operation's domain (Fock cap exceeded, n > B, ...).
class InputError : public Error {
public:
  using Error::Error;
};

/// Requested computation is not available for the configured model, e.g.
/// the closed-form click law with correlated undershoot.
class UnsupportedModelError : public Error {
public:
  using Error::Error;
};

/// The observations carry no usable evidence under the truncated prior.
class DegenerateEvidenceError : public Error {
public:
  using Error::Error;
};

/// A click count above the μ_max stability cutoff.
class RejectedObservationError : public Error {
public:
  using Error::Error;
};

/// Interpolation requested outside the hull of the support rows.
class ExtrapolationError : public Error {
public:
  using Error::Error;
};

/// Estimator evaluated at a boundary where it is undefined.
class BoundaryError : public Error {
public:
  using Error::Error;
};

/// Malformed matrix or config file. Carries the 1-based line when known.
class ParseError : public Error {
public:
  ParseError(const std::string &what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

} // namespace binflux
