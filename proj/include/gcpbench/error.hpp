#ifndef GCPBENCH_ERROR_HPP
#define GCPBENCH_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace gcpbench {

enum class ErrorCode {
  DegenerateInput,
  NoConsensus,
  OutOfRange,
  GapTooLarge,
  EmptyROI,
  NoDetection,
  MissingFrame,
  UnknownGCP,
  EmptySequence,
  InsufficientCoverage,
  NoOverlap,
  InvalidConfig,
  ParseError,
  IoError,
};

constexpr std::string_view errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::GapTooLarge: return "GapTooLarge";
    case ErrorCode::EmptyROI: return "EmptyROI";
    case ErrorCode::NoDetection: return "NoDetection";
    case ErrorCode::MissingFrame: return "MissingFrame";
    case ErrorCode::UnknownGCP: return "UnknownGCP";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::InsufficientCoverage: return "InsufficientCoverage";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(errorCodeName(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gcpbench

#endif  // GCPBENCH_ERROR_HPP
