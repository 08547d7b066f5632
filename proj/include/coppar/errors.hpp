#pragma once

#include <stdexcept>
#include <string>

namespace coppar {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Event pairing in a history is broken (response without invocation,
/// reused op id, pending operation in the middle of a process).
class WellFormednessError : public Error {
 public:
  using Error::Error;
};

/// Broadcast-layer misuse, e.g. a reused message id.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// The simulator produced a state that its own invariants forbid.
class SimulatorBug : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace coppar
