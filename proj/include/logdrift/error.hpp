#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace logdrift {

enum class ErrorCode {
  kAllZeroVector,
  kEmptySample,
  kLengthMismatch,
  kZeroTotal,
  kDegenerateSample,
  kNonPositiveInput,
  kEmptyCorpus,
  kUnsortedInput,
  kEmptyPool,
  kInvalidDetection,
  kInvalidArgument,
  kFormat,
  kIo,
  kInvariantViolation,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type. The CLI maps codes to
// exit statuses (kInvariantViolation -> 3, everything else -> 2).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace logdrift
