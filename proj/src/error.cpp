#include "gbs/error.hpp"

namespace gbs {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyBinEdges: return "EmptyBinEdges";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidKL: return "InvalidKL";
    case ErrorCode::TopologyMismatch: return "TopologyMismatch";
    case ErrorCode::NonManifoldEdge: return "NonManifoldEdge";
    case ErrorCode::BoundaryOnlyMesh: return "BoundaryOnlyMesh";
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::OrientationFlip: return "OrientationFlip";
    case ErrorCode::UnknownSex: return "UnknownSex";
    case ErrorCode::NonOAGroupTooSmall: return "NonOAGroupTooSmall";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CutLocus: return "CutLocus";
    case ErrorCode::DegenerateGeodesic: return "DegenerateGeodesic";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::SeparableData: return "SeparableData";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::CutLocus:
    case ErrorCode::DegenerateGeodesic:
    case ErrorCode::NotConverged:
    case ErrorCode::ZeroVariance:
    case ErrorCode::SeparableData:
    case ErrorCode::DegenerateConfiguration:
      return true;
    default:
      return false;
  }
}

}  // namespace gbs
