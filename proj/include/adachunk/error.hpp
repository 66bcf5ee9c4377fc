#pragma once

#include <stdexcept>
#include <string>

namespace adachunk {

// Input that violates a documented format or invariant. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while running an otherwise valid computation. Maps to CLI exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace adachunk
