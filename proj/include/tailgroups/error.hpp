#pragma once

#include <stdexcept>
#include <string>

namespace tailgroups {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The sample does not carry enough information for the requested estimate
// (e.g. all Hill log-spacings are zero, too few exceedances).
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

// An iterative numerical method did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t row, std::size_t col)
      : Error(msg), row_(row), col_(col) {}
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

}  // namespace tailgroups
