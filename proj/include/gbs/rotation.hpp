#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gbs::rotation {

/// Flip the quaternion sign so the scalar part is non-negative (ties broken
/// on the first non-zero vector component), giving each rotation a unique
/// representative.
Eigen::Quaterniond canonical(const Eigen::Quaterniond& q);

/// Unit quaternion of the rotation vector `omega` (axis times angle).
Eigen::Quaterniond exp(const Eigen::Vector3d& omega);

/// Rotation vector of `q`, with angle in [0, pi].
Eigen::Vector3d log(const Eigen::Quaterniond& q);

/// Rotation angle of `q` in [0, pi].
double angle(const Eigen::Quaterniond& q);

}  // namespace gbs::rotation
