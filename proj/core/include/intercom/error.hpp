#pragma once

#include <stdexcept>
#include <string>

namespace intercom {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed or inconsistent input data; the CLI maps it to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class SchemaMismatch : public DataError {
 public:
  using DataError::DataError;
};

// No eligible comparison post/user exists for a matching request.
class NoMatch : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : Error(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

}  // namespace intercom
