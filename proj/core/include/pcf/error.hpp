#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcf {

enum class ErrorCode {
  // spark-space
  MissingDimension,
  DuplicateTrait,
  EmptyDimension,
  ZeroAgents,
  UnknownTrait,
  // constraint-engine
  SchemaError,
  UnknownAtom,
  SelfExclusion,
  UnknownContext,
  SpaceMismatch,
  // coherence
  ContextMismatch,
  CoverInvalid,
  UnmappedTrait,
  NonInjectiveMap,
  InvalidRestriction,
  // cafe-sim
  InvariantViolation,
  UnknownTier,
  IndexOutOfRange,
  // stats
  EmptyInput,
  RankDeficient,
  DimensionMismatch,
  DegenerateResponse,
  InsufficientData,
  DegenerateX,
  // io
  IoError,
  DigestMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pcf
