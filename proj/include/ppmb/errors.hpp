#pragma once

#include <stdexcept>
#include <string>

namespace ppmb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A phase-space formula was evaluated too close to one of its poles.
class PoleError : public Error {
 public:
  using Error::Error;
};

/// A basis function cannot reach the requested value.
class UnreachableTargetError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (populations, PSD, consistency).
class DomainError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class TraceDriftError : public Error {
 public:
  using Error::Error;
};

class AllDivergedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace ppmb
