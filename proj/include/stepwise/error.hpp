#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace stepwise {

enum class ErrorCode {
  Syntax,
  DepthExceeded,
  DivByZero,
  UnsupportedExponent,
  RenderOverflow,
  NonFinite,
  NonTerminating,
  UnknownSymbol,
  UnknownId,
  RecordTooLong,
  Io,
  Format,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "SyntaxError";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::DivByZero: return "DivByZero";
    case ErrorCode::UnsupportedExponent: return "UnsupportedExponent";
    case ErrorCode::RenderOverflow: return "RenderOverflow";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NonTerminating: return "NonTerminating";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::RecordTooLong: return "RecordTooLong";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Format: return "FormatError";
  }
  return "Error";
}

/// Every failure raised by the library. `position` is a byte offset for
/// lexing/parsing/tokenizing errors, a step index for math errors raised
/// while tracing, and a 1-based line number for packing errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> position = std::nullopt)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        position_(position),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> position() const noexcept { return position_; }
  const std::string& detail() const noexcept { return detail_; }

  bool is_parse_error() const noexcept {
    return code_ == ErrorCode::Syntax || code_ == ErrorCode::DepthExceeded;
  }
  bool is_math_error() const noexcept {
    switch (code_) {
      case ErrorCode::DivByZero:
      case ErrorCode::UnsupportedExponent:
      case ErrorCode::RenderOverflow:
      case ErrorCode::NonFinite:
      case ErrorCode::NonTerminating:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
  std::optional<std::size_t> position_;
  std::string detail_;
};

}  // namespace stepwise
