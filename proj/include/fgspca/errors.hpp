#pragma once

#include <stdexcept>
#include <string>

namespace fgspca {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad values or inconsistent dimensions in caller-supplied data.
class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& msg) : Error(msg) {}
};

// Matrix shape violates an operation's precondition.
class InvalidShapeError : public Error {
 public:
  explicit InvalidShapeError(const std::string& msg) : Error(msg) {}
};

// Symmetric matrix has an eigenvalue below the PSD clamp tolerance.
class NotPsdError : public Error {
 public:
  explicit NotPsdError(const std::string& msg) : Error(msg) {}
};

// Solver produced a non-finite iterate.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, int outer, int inner)
      : Error(msg), outer_iteration(outer), inner_iteration(inner) {}
  int outer_iteration;
  int inner_iteration;
};

// File access failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// Malformed text input (CSV, config file); message carries coordinates.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

}  // namespace fgspca
