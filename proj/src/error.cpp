#include "scibench/error.hpp"

namespace scibench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kMissingRequiredField: return "MissingRequiredField";
    case ErrorCode::kInvalidEnumValue: return "InvalidEnumValue";
    case ErrorCode::kInvalidFieldValue: return "InvalidFieldValue";
    case ErrorCode::kDuplicateRecordId: return "DuplicateRecordId";
    case ErrorCode::kEmptyDocument: return "EmptyDocument";
    case ErrorCode::kInvalidPattern: return "InvalidPattern";
    case ErrorCode::kClassifierUnavailable: return "ClassifierUnavailable";
    case ErrorCode::kClassifierMalformedReply: return "ClassifierMalformedReply";
    case ErrorCode::kTextTooShort: return "TextTooShort";
    case ErrorCode::kIncompatibleSignatures: return "IncompatibleSignatures";
    case ErrorCode::kInvalidLshConfig: return "InvalidLshConfig";
    case ErrorCode::kMissingCategory: return "MissingCategory";
    case ErrorCode::kInvalidTargets: return "InvalidTargets";
    case ErrorCode::kEmptyStage: return "EmptyStage";
    case ErrorCode::kOverlappingGoldMentions: return "OverlappingGoldMentions";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kEmptyReferenceList: return "EmptyReferenceList";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyGold: return "EmptyGold";
    case ErrorCode::kJudgeUnavailable: return "JudgeUnavailable";
    case ErrorCode::kMalformedJudgeReply: return "MalformedJudgeReply";
    case ErrorCode::kNonPositiveBeta: return "NonPositiveBeta";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kInvalidScheduleConfig: return "InvalidScheduleConfig";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kStageFailure: return "StageFailure";
    case ErrorCode::kIdMismatch: return "IdMismatch";
    case ErrorCode::kUnknownTask: return "UnknownTask";
    case ErrorCode::kEmptyReport: return "EmptyReport";
  }
  return "UnknownError";
}

}  // namespace scibench
