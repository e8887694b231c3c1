#include "affgest/error.hpp"

namespace affgest {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kEmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyRow: return "EmptyRow";
    case ErrorCode::kZeroProbabilityEvidence: return "ZeroProbabilityEvidence";
    case ErrorCode::kUnknownWord: return "UnknownWord";
    case ErrorCode::kDegenerateTrajectory: return "DegenerateTrajectory";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kCollapsedState: return "CollapsedState";
    case ErrorCode::kZeroFusion: return "ZeroFusion";
    case ErrorCode::kInvalidStrategy: return "InvalidStrategy";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace affgest
