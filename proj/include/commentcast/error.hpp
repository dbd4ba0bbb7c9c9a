#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace commentcast {

enum class ErrorCode {
  MalformedTimestamp,
  OverlapError,
  XmlSyntaxError,
  AttributeArity,
  NumericField,
  EmptyAudio,
  InvalidAudio,
  InvalidInput,
  DurationMismatch,
  ProviderFailure,
  DurationUnachievable,
  NoCandidates,
  CapacityViolation,
  AssetMissing,
  MissingStage,
  StaleInput,
  InvalidConfig,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedTimestamp: return "MalformedTimestamp";
    case ErrorCode::OverlapError: return "OverlapError";
    case ErrorCode::XmlSyntaxError: return "XmlSyntaxError";
    case ErrorCode::AttributeArity: return "AttributeArity";
    case ErrorCode::NumericField: return "NumericField";
    case ErrorCode::EmptyAudio: return "EmptyAudio";
    case ErrorCode::InvalidAudio: return "InvalidAudio";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DurationMismatch: return "DurationMismatch";
    case ErrorCode::ProviderFailure: return "ProviderFailure";
    case ErrorCode::DurationUnachievable: return "DurationUnachievable";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::CapacityViolation: return "CapacityViolation";
    case ErrorCode::AssetMissing: return "AssetMissing";
    case ErrorCode::MissingStage: return "MissingStage";
    case ErrorCode::StaleInput: return "StaleInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// All pipeline failures surface as this exception; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Non-fatal conditions (truncated descriptions, clamped ratings, dropped
// comments) are collected here and reported by the caller.
class Warnings {
 public:
  void add(std::string message) { items_.push_back(std::move(message)); }
  const std::vector<std::string>& items() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }

 private:
  std::vector<std::string> items_;
};

}  // namespace commentcast
