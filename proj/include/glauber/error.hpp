#pragma once

#include <stdexcept>
#include <string>

namespace glauber {

enum class ErrorKind {
  kInvalidParameter,
  kParseError,
  kEnumerationOverflow,
  kEmptySupport,
  kComponentTooComplex,
  kDegenerateInstance,
  kUndefinedInfluence,
  kNumericFailure,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace glauber
