#include "gbs/rotation.hpp"

#include <cmath>

namespace gbs::rotation {

Eigen::Quaterniond canonical(const Eigen::Quaterniond& q) {
  bool flip = q.w() < 0.0;
  if (q.w() == 0.0) {
    if (q.x() != 0.0) flip = q.x() < 0.0;
    else if (q.y() != 0.0) flip = q.y() < 0.0;
    else flip = q.z() < 0.0;
  }
  if (!flip) return q;
  return Eigen::Quaterniond(-q.w(), -q.x(), -q.y(), -q.z());
}

Eigen::Quaterniond exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const double half = 0.5 * theta;
  // sin(theta/2)/theta, with its Taylor expansion near zero
  const double k = theta < 1e-6 ? 0.5 - theta * theta / 48.0
                                 : std::sin(half) / theta;
  return Eigen::Quaterniond(std::cos(half), k * omega.x(), k * omega.y(),
                            k * omega.z());
}

Eigen::Vector3d log(const Eigen::Quaterniond& q) {
  const Eigen::Quaterniond c = canonical(q);
  const Eigen::Vector3d v = c.vec();
  const double s = v.norm();
  if (s == 0.0) return Eigen::Vector3d::Zero();
  const double theta = 2.0 * std::atan2(s, c.w());
  return (theta / s) * v;
}

double angle(const Eigen::Quaterniond& q) {
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

}  // namespace gbs::rotation
