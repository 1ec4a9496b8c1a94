#include "huberlr/common.hpp"

namespace huberlr {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::WeightsNotNondecreasing: return "WeightsNotNondecreasing";
    case ErrorCode::CenterMismatch: return "CenterMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::LocationOutOfGrid: return "LocationOutOfGrid";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::InfeasibleMask: return "InfeasibleMask";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::ProblemMismatch: return "ProblemMismatch";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace huberlr
