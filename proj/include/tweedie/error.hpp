#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tweedie {

enum class ErrorCode {
  kInvalidParams,
  kNegativeX,
  kDomainError,
  kUnknownTitle,
  kEmptyDataset,
  kInvalidConfig,
  kInvalidRanking,
  kDegenerateVariance,
  kEmptySample,
  kZeroVariance,
  kDegenerateFit,
  kRankDeficient,
  kDegenerate,
  kIoError,
  kConfigParseError,
  kValidation,
};

std::string_view to_string(ErrorCode code);

/// Validation-class errors are caused by bad user input (exit code 1);
/// everything else is a runtime or numeric failure (exit code 2).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the error-code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace tweedie
