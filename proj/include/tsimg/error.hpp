#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsimg {

enum class ErrorCode {
  // series-core
  EmptyResult,
  InvalidPeriod,
  UnstableCoefficient,
  ShapeMismatch,
  // imaging
  SeriesTooShort,
  InvalidL,
  LengthMismatch,
  NotSquare,
  EmbeddingTooLarge,
  WindowTooLong,
  InvalidArgument,
  // alignment / models
  IndivisiblePatch,
  HorizonTooLong,
  NonFiniteLoss,
  RoutingError,
  // training
  LabelOutOfRange,
  EmptyMask,
  // evaluation
  TooShort,
  DivByZero,
  NonPositive,
  NonIntegerSegment,
  EmptyInput,
  // data-io
  ParseError,
  NonNumericCell,
  EmptyFile,
  InconsistentWidth,
  LabelNotInteger,
  IoError,
  VersionMismatch,
  CorruptFile,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace tsimg
