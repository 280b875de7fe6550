#pragma once

#include <stdexcept>
#include <string>

namespace lse {

/// Base of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. g(u) for u < 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Family parameters outside their admissible region.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Caller misuse: dimension mismatches, empty inputs, bad indices.
class UsageError : public Error {
 public:
  using Error::Error;
};

class NonIntegrableError : public Error {
 public:
  using Error::Error;
};

class IntegrabilityError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Two distributions do not share (generator, alpha/beta map, mixing law).
class IncomparableFamiliesError : public Error {
 public:
  using Error::Error;
};

class SingularTransformError : public Error {
 public:
  using Error::Error;
};

class SizeLimitError : public Error {
 public:
  using Error::Error;
};

/// Scenario document errors. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace lse
