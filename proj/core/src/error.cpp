#include "minv/error.hpp"

namespace minv {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RangeEscape: return "RangeEscape";
    case ErrorCode::InvalidMeasure: return "InvalidMeasure";
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::InfiniteBound: return "InfiniteBound";
    case ErrorCode::SolverStall: return "SolverStall";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::EmptyRangeMass: return "EmptyRangeMass";
    case ErrorCode::RangeMismatch: return "RangeMismatch";
    case ErrorCode::EmptyFiber: return "EmptyFiber";
    case ErrorCode::PriorVanishes: return "PriorVanishes";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::UnsupportedData: return "UnsupportedData";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace minv
