#include "pcf/error.hpp"

namespace pcf {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingDimension: return "MissingDimension";
    case ErrorCode::DuplicateTrait: return "DuplicateTrait";
    case ErrorCode::EmptyDimension: return "EmptyDimension";
    case ErrorCode::ZeroAgents: return "ZeroAgents";
    case ErrorCode::UnknownTrait: return "UnknownTrait";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownAtom: return "UnknownAtom";
    case ErrorCode::SelfExclusion: return "SelfExclusion";
    case ErrorCode::UnknownContext: return "UnknownContext";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::ContextMismatch: return "ContextMismatch";
    case ErrorCode::CoverInvalid: return "CoverInvalid";
    case ErrorCode::UnmappedTrait: return "UnmappedTrait";
    case ErrorCode::NonInjectiveMap: return "NonInjectiveMap";
    case ErrorCode::InvalidRestriction: return "InvalidRestriction";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::UnknownTier: return "UnknownTier";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateResponse: return "DegenerateResponse";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateX: return "DegenerateX";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DigestMismatch: return "DigestMismatch";
  }
  return "Unknown";
}

}  // namespace pcf
