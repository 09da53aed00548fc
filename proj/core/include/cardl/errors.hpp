#pragma once

#include <stdexcept>
#include <string>

namespace cardl {

// Every failure raised by the library derives from Error. The CLI maps the
// concrete type to a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller misuse: bad arguments, preconditions the caller controls.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Shape disagreement between operands.
class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

// NaN/Inf, zero norms and other numerical breakdowns.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace cardl
