#pragma once

#include <stdexcept>
#include <string>

namespace slsp {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or non-finite user input, shape mismatches.
class InputError : public Error {
 public:
  using Error::Error;
};

// Kernel construction cannot produce a usable scale (all samples identical,
// zero matrix, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// A linear system could not be factorized.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

// ADMM iterates became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

// CSV / file-format problems. Carries the 1-based line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : what + " at line " + std::to_string(line)),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace slsp
