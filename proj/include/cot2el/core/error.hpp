#pragma once

#include <stdexcept>
#include <string>

namespace cot2el {

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when input data violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Raised by the LLM gateway (transport failures, fixture misses).
class GatewayError : public Error {
 public:
  GatewayError(const std::string& what, int status = 0) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Raised by external adapters (segmenters, embedders, taggers).
class AdapterError : public Error {
 public:
  using Error::Error;
};

}  // namespace cot2el
