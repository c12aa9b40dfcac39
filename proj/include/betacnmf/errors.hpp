#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace betacnmf {

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input violates a precondition (negative entry, non-positive init, bad count).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input (matrix files, traces, config).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loss or factor became non-finite during fitting.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::size_t iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace betacnmf
