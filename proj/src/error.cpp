#include "tweedie/error.hpp"

namespace tweedie {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParams: return "invalid-params";
    case ErrorCode::kNegativeX: return "negative-x";
    case ErrorCode::kDomainError: return "domain-error";
    case ErrorCode::kUnknownTitle: return "unknown-title";
    case ErrorCode::kEmptyDataset: return "empty-dataset";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kInvalidRanking: return "invalid-ranking";
    case ErrorCode::kDegenerateVariance: return "degenerate-variance";
    case ErrorCode::kEmptySample: return "empty-sample";
    case ErrorCode::kZeroVariance: return "zero-variance";
    case ErrorCode::kDegenerateFit: return "degenerate-fit";
    case ErrorCode::kRankDeficient: return "rank-deficient";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kIoError: return "io-error";
    case ErrorCode::kConfigParseError: return "config-parse-error";
    case ErrorCode::kValidation: return "validation-error";
  }
  return "unknown-error";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParams:
    case ErrorCode::kNegativeX:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidRanking:
    case ErrorCode::kUnknownTitle:
    case ErrorCode::kEmptyDataset:
    case ErrorCode::kEmptySample:
    case ErrorCode::kZeroVariance:
    case ErrorCode::kConfigParseError:
    case ErrorCode::kValidation:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      message_(message) {}

}  // namespace tweedie
