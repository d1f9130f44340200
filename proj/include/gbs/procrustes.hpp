#pragma once

#include <span>
#include <vector>

#include "gbs/mesh.hpp"

namespace gbs {

struct ProcrustesOptions {
  double tol = 1e-10;  // mm, RMS movement of the consensus per vertex
  int max_iter = 100;
};

/// Rotation R minimizing sum_j |R x_j - y_j|^2 for centered point sets
/// (columns), det R = +1.
Eigen::Matrix3d optimal_rotation(const Eigen::Matrix3Xd& x,
                                 const Eigen::Matrix3Xd& y);

/// Generalized Procrustes analysis with rotations and translations only (no
/// scaling). Meshes are centered, then repeatedly rotated onto the running
/// consensus (initialized with the first mesh) until the consensus moves
/// less than `tol`. The result is finally expressed in the principal-axis
/// frame of the consensus, so it does not depend on the input poses.
///
/// Throws TopologyMismatch, DegenerateConfiguration (a mesh whose vertices
/// all coincide) or NotConverged.
std::vector<TriangleMesh> procrustes_align(std::span<const TriangleMesh> meshes,
                                           const ProcrustesOptions& options = {});

}  // namespace gbs
