#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace localgd {

/// Bad input to an operation: dimension mismatch, invalid count, malformed config.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A bound or check was requested outside the stepsize range where it is claimed.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Power iteration failed to settle; carries the last iterate.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::vector<double> last_iterate)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

 private:
  std::vector<double> last_iterate_;
};

/// Local GD produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// LIBSVM input that does not follow the grammar. `line` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace localgd
