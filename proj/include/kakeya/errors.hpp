#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kakeya {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input or violated precondition. The CLI maps this to exit code 2.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public InvalidArgument {
 public:
  ParseError(const std::string& what, std::size_t position)
      : InvalidArgument(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A point left the domain of a map or an expression was evaluated where it
/// is undefined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative or integration failure (Newton divergence, step-size collapse).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A structural condition on a phase function does not hold (e.g. the
/// y-Hessians are not proportional), so a pipeline cannot continue.
class ConditionFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace kakeya
