#include "tsimg/error.hpp"

namespace tsimg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::InvalidPeriod: return "InvalidPeriod";
    case ErrorCode::UnstableCoefficient: return "UnstableCoefficient";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::InvalidL: return "InvalidL";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::EmbeddingTooLarge: return "EmbeddingTooLarge";
    case ErrorCode::WindowTooLong: return "WindowTooLong";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IndivisiblePatch: return "IndivisiblePatch";
    case ErrorCode::HorizonTooLong: return "HorizonTooLong";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::RoutingError: return "RoutingError";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::DivByZero: return "DivByZero";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::NonIntegerSegment: return "NonIntegerSegment";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::InconsistentWidth: return "InconsistentWidth";
    case ErrorCode::LabelNotInteger: return "LabelNotInteger";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace tsimg
