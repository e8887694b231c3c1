#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace affgest {

enum class ErrorCode {
  kUnknownLabel,
  kEmptyVocabulary,
  kInvalidArgument,
  kEmptyRow,
  kZeroProbabilityEvidence,
  kUnknownWord,
  kDegenerateTrajectory,
  kTooShort,
  kEmptyTrainingSet,
  kCollapsedState,
  kZeroFusion,
  kInvalidStrategy,
  kParse,
  kIo,
};

const char* to_string(ErrorCode code);

/// Base class for every error raised by the library. The code is stable and
/// is what the command line tool maps onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class UnknownLabelError : public Error {
 public:
  UnknownLabelError(std::string field, std::string value)
      : Error(ErrorCode::kUnknownLabel,
              "unknown label '" + value + "' for field '" + field + "'"),
        field_(std::move(field)),
        value_(std::move(value)) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& value() const noexcept { return value_; }

 private:
  std::string field_;
  std::string value_;
};

class CollapsedStateError : public Error {
 public:
  CollapsedStateError(std::string label, std::size_t state)
      : Error(ErrorCode::kCollapsedState,
              "HMM '" + label + "': state " + std::to_string(state) +
                  " received no occupancy during training"),
        state_(state) {}

  std::size_t state() const noexcept { return state_; }

 private:
  std::size_t state_;
};

}  // namespace affgest
