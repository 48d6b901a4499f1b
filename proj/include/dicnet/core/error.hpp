#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dicnet {

/// Base of every error raised by the library. The message is prefixed with
/// the module that raised it, e.g. "data: view 1 has 99 columns, expected 100".
class Error : public std::runtime_error {
 public:
  Error(std::string_view module, const std::string& message)
      : std::runtime_error(std::string(module) + ": " + message),
        module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Operand or file shapes disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or parse failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dicnet
