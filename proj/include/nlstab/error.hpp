#pragma once

#include <stdexcept>
#include <string>

namespace nlstab {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the declared domain of a model (e.g. s outside valid_range).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent configuration / input data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure failed (non-convergence, blow-up, degenerate speed).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlstab
