#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gbs {

enum class ErrorCode {
  // validation
  LayoutMismatch,
  InvalidArgument,
  InsufficientData,
  EmptyInput,
  EmptyBinEdges,
  ParseError,
  DuplicateId,
  InvalidKL,
  TopologyMismatch,
  NonManifoldEdge,
  BoundaryOnlyMesh,
  DegenerateFace,
  OrientationFlip,
  UnknownSex,
  NonOAGroupTooSmall,
  InvalidSpec,
  IoError,
  // numerical
  CutLocus,
  DegenerateGeodesic,
  NotConverged,
  ZeroVariance,
  SeparableData,
  DegenerateConfiguration,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by the numerics rather than by malformed input.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gbs
