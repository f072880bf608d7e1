#pragma once

#include <stdexcept>
#include <string>

namespace lubelastic {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exponents outside the admissible range (for example κ ≤ 0).
class InvalidRegime : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Grids, node sets or time samples that do not line up.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Nonpositive film height where the mobility η³ requires η > 0.
class PositivityViolation : public Error {
 public:
  using Error::Error;
};

/// Numerical failure of a time integrator (step size exhausted, non-finite state).
class Breakdown : public Error {
 public:
  using Error::Error;
};

/// A singular or non-finite factorization of a per-mode system.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

/// Least-squares fit that cannot be formed (zero errors, too few points).
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

class AuditFailure : public Error {
 public:
  AuditFailure(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

}  // namespace lubelastic
