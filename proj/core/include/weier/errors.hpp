#pragma once

#include <stdexcept>
#include <string>

namespace weier {

// Bad user input: out-of-range parameters, malformed files, bad options.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A derivative of higher order than the function supports was requested.
class UnsupportedDerivative : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An operation was called outside its documented hypothesis.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A runtime self-check failed.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace weier
