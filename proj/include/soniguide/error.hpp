#ifndef SONIGUIDE_ERROR_HPP
#define SONIGUIDE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace soniguide {

// Root of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates a type invariant (bad config, invalid session, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition (mismatched state, inconsistent frame).
class ContractError : public Error {
 public:
  using Error::Error;
};

class InvalidRingError : public ValidationError {
 public:
  InvalidRingError(int ring_index, const std::string& what)
      : ValidationError("ring " + std::to_string(ring_index) + ": " + what), ring_index_(ring_index) {}

  int ring_index() const noexcept { return ring_index_; }

 private:
  int ring_index_;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// Malformed input document. `location` is "line:col" for syntax errors or a
// field path such as "trials[3].samples[0]" for schema errors.
class ParseError : public Error {
 public:
  ParseError(std::string location, const std::string& what)
      : Error(location + ": " + what), location_(std::move(location)) {}

  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

}  // namespace soniguide

#endif  // SONIGUIDE_ERROR_HPP
