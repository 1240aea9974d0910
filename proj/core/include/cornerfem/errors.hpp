#pragma once

#include <stdexcept>
#include <string>

namespace cornerfem {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input parameter (angle, grading exponent, radius, ...) is out of range.
class DomainParameterError : public Error {
 public:
  using Error::Error;
};

class TriangulationError : public Error {
 public:
  using Error::Error;
};

/// The grading map inverted a triangle or the spec does not fit the mesh.
class GradingError : public Error {
 public:
  using Error::Error;
};

/// Mesh failed structural validation.
class MeshError : public Error {
 public:
  using Error::Error;
};

class ElementError : public Error {
 public:
  using Error::Error;
};

/// A data field returned a non-finite value at a quadrature point.
class DataEvaluationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class PreconditionerError : public Error {
 public:
  using Error::Error;
};

class NotSpdError : public Error {
 public:
  using Error::Error;
};

/// Nonlinearity violates monotonicity or has an inconsistent derivative.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

class SingularPointError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped without meeting its tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}

  /// 1-based line number of the offending input, 0 if not line-specific.
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cornerfem
