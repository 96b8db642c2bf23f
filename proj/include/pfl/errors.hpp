#pragma once

#include <stdexcept>
#include <string>

namespace pfl {

// Base of every library error. Argument validation uses std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceExhausted : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class InvalidBoundary : public Error {
 public:
  using Error::Error;
};

class BracketFailure : public Error {
 public:
  using Error::Error;
};

class ResolutionExhausted : public Error {
 public:
  using Error::Error;
};

class EmptySet : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A field value became NaN or infinite.
class NonFinite : public Error {
 public:
  using Error::Error;
};

// Rethrows the active pfl exception as the same type with a prefixed message.
[[noreturn]] void rethrow_with_context(const std::string& context);

}  // namespace pfl
