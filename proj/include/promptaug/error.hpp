#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace promptaug {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kRleCountMismatch,
  kEmptyMask,
  kEmptyCandidates,
  kInsufficientCandidates,
  kSaliencyEmpty,
  kInvalidPrompt,
  kProviderUnavailable,
  kSegmenterUnavailable,
  kAdapterError,
  kProtocolError,
  kSpawnFailed,
  kHandshakeTimeout,
  kVersionMismatch,
  kConfigError,
  kIoError,
  kParseError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so
// callers (the harness in particular) can decide between skip, fallback and
// abort without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace promptaug
