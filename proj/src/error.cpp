#include "glauber/error.hpp"

namespace glauber {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidParameter: return "invalid-parameter";
    case ErrorKind::kParseError: return "parse-error";
    case ErrorKind::kEnumerationOverflow: return "enumeration-overflow";
    case ErrorKind::kEmptySupport: return "empty-support";
    case ErrorKind::kComponentTooComplex: return "component-too-complex";
    case ErrorKind::kDegenerateInstance: return "degenerate-instance";
    case ErrorKind::kUndefinedInfluence: return "undefined-influence";
    case ErrorKind::kNumericFailure: return "numeric-failure";
  }
  return "unknown";
}

}  // namespace glauber
