#pragma once

#include <stdexcept>
#include <string>

namespace deptrail {

enum class ErrorCode {
  BadMagic,
  TruncatedStream,
  DimensionMismatch,
  NonPositiveDims,
  ShapeMismatch,
  EmptyInput,
  DepthOutOfRange,
  ImageTooSmall,
  EmptyRegion,
  LengthMismatch,
  DegenerateData,
  SingularSystem,
  LabelOutOfRange,
  UnknownSubject,
  EmptyClassAfterFilter,
  MissingClassInTrain,
  ParseError,
  IoError,
  InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedStream: return "TruncatedStream";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveDims: return "NonPositiveDims";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DepthOutOfRange: return "DepthOutOfRange";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::UnknownSubject: return "UnknownSubject";
    case ErrorCode::EmptyClassAfterFilter: return "EmptyClassAfterFilter";
    case ErrorCode::MissingClassInTrain: return "MissingClassInTrain";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

/// Exception carrying a machine-checkable code next to the human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace deptrail
