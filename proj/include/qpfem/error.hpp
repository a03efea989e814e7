#pragma once

#include <stdexcept>
#include <string>

namespace qpfem {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidPartition : public Error {
public:
  using Error::Error;
};

class UnsupportedRule : public Error {
public:
  using Error::Error;
};

class IndexError : public Error {
public:
  using Error::Error;
};

class InvalidDegree : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class BoundaryMismatch : public Error {
public:
  using Error::Error;
};

class IncompatibleSpaces : public Error {
public:
  using Error::Error;
};

class RegistryError : public Error {
public:
  using Error::Error;
};

class EllipticityViolation : public Error {
public:
  EllipticityViolation(const std::string& what, double min_value)
      : Error(what), min_value_(min_value) {}
  double min_value() const noexcept { return min_value_; }

private:
  double min_value_;
};

class BandwidthViolation : public Error {
public:
  using Error::Error;
};

class SingularMatrix : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class ProjectionFailure : public Error {
public:
  using Error::Error;
};

class InvalidQuasiOrder : public Error {
public:
  using Error::Error;
};

/// Newton did not reach tolerance; carries the last residual norm.
class NonConvergence : public Error {
public:
  NonConvergence(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

private:
  double last_residual_;
};

class ParameterError : public Error {
public:
  using Error::Error;
};

/// Configuration parse failure; line is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
  ParseError(int line, const std::string& msg)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

}  // namespace qpfem
