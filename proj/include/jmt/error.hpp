#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jmt {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible shapes or an unknown op at graph build time.
class BuildError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or misuse during forward/backward.
class EvalError : public Error {
 public:
  using Error::Error;
};

// Violated precondition of a public operation.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Bad command line or mismatched inputs (CLI exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace jmt
