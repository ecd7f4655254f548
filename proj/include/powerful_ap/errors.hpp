#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace powerful_ap {

// Base class for every error this library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A composite cofactor resisted the configured factoring effort.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// long_ap could not complete; `step` is the 1-based extension step that failed.
class ExtensionFailed : public BudgetExceeded {
 public:
  ExtensionFailed(std::size_t step, const std::string& what)
      : BudgetExceeded("extension step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class NotPowerful : public Error {
 public:
  using Error::Error;
};

class CapacityExceeded : public Error {
 public:
  using Error::Error;
};

// Two algebraically equal quantities disagreed; always a defect.
class ConsistencyFailure : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class NotCoprime : public Error {
 public:
  using Error::Error;
};

class NotASum : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace powerful_ap
