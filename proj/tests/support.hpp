#pragma once

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <vector>

#include "gbs/manifold.hpp"
#include "gbs/rng.hpp"

namespace gbs::test {

inline Eigen::Vector3d random_axis(Rng& rng) {
  Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
  return v.normalized();
}

inline Eigen::Quaterniond random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return q.normalized();
}

/// Random point: uniform rotations, log-SPD and Euclidean coordinates N(0, scale).
inline ShapePoint random_point(const ManifoldLayout& layout, Rng& rng, double scale = 1.0) {
  std::vector<double> c;
  for (std::size_t i = 0; i < layout.rotation_count(); ++i) {
    const Eigen::Quaterniond q = random_rotation(rng);
    c.insert(c.end(), {q.w(), q.x(), q.y(), q.z()});
  }
  for (std::size_t k = 0; k < layout.flat_size(); ++k) c.push_back(scale * rng.normal());
  return ShapePoint(layout, std::move(c));
}

/// Random tangent whose rotation blocks have angles uniform in [0, max_angle].
inline TangentVector random_tangent(const ManifoldLayout& layout, Rng& rng,
                                    double max_angle = 0.9 * std::numbers::pi,
                                    double flat_scale = 1.0) {
  std::vector<double> c;
  for (std::size_t i = 0; i < layout.rotation_count(); ++i) {
    const Eigen::Vector3d w = rng.uniform(0.0, max_angle) * random_axis(rng);
    c.insert(c.end(), {w.x(), w.y(), w.z()});
  }
  for (std::size_t k = 0; k < layout.flat_size(); ++k) c.push_back(flat_scale * rng.normal());
  return TangentVector(layout, std::move(c));
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace gbs::test
