#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankfair {

// Bad user input: malformed files, invalid configuration, out-of-range
// arguments. The CLI maps this family to exit code 2; everything else
// that derives from std::runtime_error maps to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. Carries the 1-based line number when known.
class ParseError : public ValidationError {
 public:
  explicit ParseError(const std::string& message, std::size_t line = 0)
      : ValidationError(line > 0 ? message + " (line " + std::to_string(line) + ")"
                                 : message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Training aborted: divergence, single-class data, non-finite loss.
class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rankfair
