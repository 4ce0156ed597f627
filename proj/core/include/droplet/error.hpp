#pragma once

#include <stdexcept>
#include <string>

namespace droplet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched dimensions, supports outside the chain, malformed inputs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Requested Hilbert space exceeds the configured memory budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A dense eigensolver or SVD failed to converge.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int sector)
      : Error(what + " (sector " + std::to_string(sector) + ")"), sector_(sector) {}
  int sector() const noexcept { return sector_; }

 private:
  int sector_;
};

/// Bad experiment configuration; raised before any computation starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace droplet
