#pragma once

#include <stdexcept>
#include <string>

namespace agency {

/// Input that is well-formed but violates a model invariant
/// (non-monotone table, non-positive cost, agent outside a set, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem size beyond what the exhaustive routines accept.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Syntax error in one of the text formats; carries the 1-based line.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace agency
