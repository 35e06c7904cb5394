#pragma once

#include <stdexcept>
#include <string>

namespace quadmanip {

/// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (dimension mismatch, zero vector, bad length).
class UsageError : public Error {
 public:
  using Error::Error;
};

class InvalidDepth : public Error {
 public:
  using Error::Error;
};

/// Surface normal parallel to the dominant axis: both constraints cannot hold.
class DegenerateConstraints : public Error {
 public:
  using Error::Error;
};

class OracleFailure : public Error {
 public:
  using Error::Error;
};

class InvalidPlan : public Error {
 public:
  InvalidPlan(std::size_t action_index, const std::string& what)
      : Error(what), action_index_(action_index) {}
  std::size_t action_index() const noexcept { return action_index_; }

 private:
  std::size_t action_index_;
};

class NoFeasibleGoal : public Error {
 public:
  using Error::Error;
};

class NoPath : public Error {
 public:
  using Error::Error;
};

class UnknownObject : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (YAML/CSV). Line is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0) : Error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Well-formed input whose contents break a cross-reference or range rule.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, int line = 0) : Error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace quadmanip
