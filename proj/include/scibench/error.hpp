#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scibench {

enum class ErrorCode {
  // records
  kMalformedRecord,
  kMissingRequiredField,
  kInvalidEnumValue,
  kInvalidFieldValue,
  kDuplicateRecordId,
  // cleaning
  kEmptyDocument,
  kInvalidPattern,
  kClassifierUnavailable,
  kClassifierMalformedReply,
  // dedup
  kTextTooShort,
  kIncompatibleSignatures,
  kInvalidLshConfig,
  // curriculum
  kMissingCategory,
  kInvalidTargets,
  kEmptyStage,
  // metrics
  kOverlappingGoldMentions,
  kEmptyReference,
  kEmptyReferenceList,
  kLengthMismatch,
  kEmptyInput,
  kEmptyGold,
  // judge
  kJudgeUnavailable,
  kMalformedJudgeReply,
  // dpo
  kNonPositiveBeta,
  kNonFiniteInput,
  kInvalidScheduleConfig,
  kEmptyBatch,
  // orchestration
  kInvalidConfig,
  kIoError,
  kStageFailure,
  kIdMismatch,
  kUnknownTask,
  kEmptyReport,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a code so callers (and the
/// CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace scibench
