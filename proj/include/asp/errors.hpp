#pragma once

#include <stdexcept>
#include <string>

namespace asp {

// Argument outside the mathematical domain of an operation (p outside (0,1),
// negative durations, empty scenario sets, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Vector or matrix sizes that do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed distribution, cost or config text. `token()` is the offending
// fragment of the input.
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::string token)
      : std::invalid_argument(what + " (at '" + token + "')"), token_(std::move(token)) {}

  const std::string& token() const noexcept { return token_; }

 private:
  std::string token_;
};

// A request the library declines to run, e.g. exhaustive search above its size cap.
class RefusedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace asp
