#pragma once

// Fundamental-coordinate encoding of meshes in correspondence with a
// reference: per face, the in-plane Cauchy-Green tensor (a 2x2 SPD first
// fundamental form, stored as its matrix logarithm); per inner edge, the
// relative rotation R_i^T R_j of the polar factors of the two adjacent
// deformation gradients. The encoding is invariant under rigid motions of
// the subject.

#include <Eigen/Core>
#include <array>
#include <vector>

#include "gbs/manifold.hpp"
#include "gbs/mesh.hpp"

namespace gbs {

enum class BlockWeighting {
  uniform,  // every block weighs 1
  area,     // SPD blocks by reference face area, rotation blocks by inner
            // edge length, each normalized to mean 1
};

/// Matrix logarithm of a 2x2 SPD matrix, packed (a, b, c).
std::array<double, 3> spd_log(const Eigen::Matrix2d& m);
/// Inverse of spd_log.
Eigen::Matrix2d spd_exp(const std::array<double, 3>& packed);

/// Rotation factor R of the polar decomposition F = R U, det R = +1.
Eigen::Matrix3d polar_rotation(const Eigen::Matrix3d& f);

class FcmEncoder {
 public:
  explicit FcmEncoder(TriangleMesh reference,
                      BlockWeighting weighting = BlockWeighting::uniform);

  const TriangleMesh& reference() const { return reference_; }
  const MeshTopology& topology() const { return topology_; }
  /// rotation_count = inner edges, spd_count = faces.
  const ManifoldLayout& layout() const { return layout_; }

  /// Per face, the linear map taking the reference edge vectors and unit
  /// normal to the subject's: [e1' e2' n'] [e1 e2 n]^-1.
  /// Throws TopologyMismatch, DegenerateFace or OrientationFlip.
  std::vector<Eigen::Matrix3d> deformation_gradients(
      const TriangleMesh& subject) const;

  ShapePoint encode(const TriangleMesh& subject) const;

 private:
  TriangleMesh reference_;
  MeshTopology topology_;
  ManifoldLayout layout_;
  std::vector<Eigen::Matrix3d> inverse_frames_;
  // orthonormal in-plane basis of each reference face (3x2)
  std::vector<Eigen::Matrix<double, 3, 2>> tangent_bases_;
};

std::vector<Eigen::Matrix3d> deformation_gradients(const TriangleMesh& reference,
                                                   const TriangleMesh& subject);
ShapePoint encode(const TriangleMesh& reference, const TriangleMesh& subject);

}  // namespace gbs
