#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace legoabsa {

enum class ErrorCode {
  InvalidValue,
  MissingElement,
  SignatureMismatch,
  MalformedSegment,
  UnknownSentinel,
  SlotOrderViolation,
  TermNotTokenAligned,
  IndexOutOfRange,
  ArityMismatch,
  UnknownSignature,
  UnknownStyle,
  UnreadableFile,
  MalformedLine,
  SchemaMismatch,
  EmptyEntry,
  BackendUnavailable,
  BackendProtocolError,
  LengthMismatch,
  BothAbsent,
  MissingDetail,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::MissingElement: return "MissingElement";
    case ErrorCode::SignatureMismatch: return "SignatureMismatch";
    case ErrorCode::MalformedSegment: return "MalformedSegment";
    case ErrorCode::UnknownSentinel: return "UnknownSentinel";
    case ErrorCode::SlotOrderViolation: return "SlotOrderViolation";
    case ErrorCode::TermNotTokenAligned: return "TermNotTokenAligned";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::UnknownSignature: return "UnknownSignature";
    case ErrorCode::UnknownStyle: return "UnknownStyle";
    case ErrorCode::UnreadableFile: return "UnreadableFile";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EmptyEntry: return "EmptyEntry";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::BackendProtocolError: return "BackendProtocolError";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BothAbsent: return "BothAbsent";
    case ErrorCode::MissingDetail: return "MissingDetail";
  }
  return "Unknown";
}

// Every failure raised by the library. `position` is a byte offset for
// decoder errors and a 1-based line number for file errors; npos otherwise.
struct Error : public std::runtime_error {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  ErrorCode code;
  std::size_t position;
  std::string reason;  // message without the code prefix

  Error(ErrorCode code_, const std::string& message, std::size_t position_ = npos)
      : std::runtime_error(std::string(error_code_name(code_)) + ": " + message),
        code(code_),
        position(position_),
        reason(message) {}
};

// Backend failures name the half-open prompt index range of the failing batch.
struct BackendError : public Error {
  std::size_t batch_begin;
  std::size_t batch_end;

  BackendError(ErrorCode code_, const std::string& message, std::size_t begin, std::size_t end)
      : Error(code_,
              message + " [prompts " + std::to_string(begin) + ".." + std::to_string(end) + ")"),
        batch_begin(begin),
        batch_end(end) {}
};

}  // namespace legoabsa
