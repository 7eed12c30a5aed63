#pragma once

#include <stdexcept>
#include <string>

namespace msprobit {

// Bad input data or configuration. CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sampler or numerical failure (degenerate interval, non-SPD matrix, tuning
// failure). CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or unwritable file. CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace msprobit
