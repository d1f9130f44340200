#pragma once

// Product manifolds SO(3)^n x Sym+(2)^m x R^d.
//
// Point coordinates: n unit quaternions (w, x, y, z), then m packed
// symmetric matrix logarithms (a, b, c) ~ [[a, b], [b, c]], then d raw
// Euclidean coordinates. Tangent coordinates: n body-frame rotation vectors
// (v = p * [omega]), then the SPD and Euclidean blocks in the same packing
// as the point. The SPD and Euclidean parts are flat and stored contiguously,
// so Exp, Log and transport on them are vector arithmetic.
//
// Metric: sum over blocks of weight_b * <u_b, v_b>, where the rotation
// inner product is omega_u . omega_v (geodesic distance equals rotation
// angle) and the SPD inner product is the Frobenius product of the log
// matrices (a a' + 2 b b' + c c').

#include <Eigen/Geometry>
#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace gbs {

/// Relative angle at which a rotation block is treated as being on the cut
/// locus.
inline constexpr double kCutLocusMargin = 1e-8;

class ManifoldLayout {
 public:
  /// The zero-dimensional layout.
  ManifoldLayout();
  /// Blocks are ordered rotations, SPD, then one Euclidean block (present
  /// when euclidean_dim > 0). Empty `block_weights` means all ones.
  ManifoldLayout(std::size_t rotation_count, std::size_t spd_count,
                 std::size_t euclidean_dim,
                 std::vector<double> block_weights = {});

  static ManifoldLayout euclidean(std::size_t dim);

  std::size_t rotation_count() const { return data_->rotations; }
  std::size_t spd_count() const { return data_->spds; }
  std::size_t euclidean_dim() const { return data_->euclidean; }
  std::size_t block_count() const { return data_->block_weights.size(); }

  std::size_t point_size() const { return 4 * rotation_count() + flat_size(); }
  std::size_t tangent_size() const {
    return 3 * rotation_count() + flat_size();
  }
  /// Length of the SPD + Euclidean coordinate run (shared by points and
  /// tangents).
  std::size_t flat_size() const { return 3 * spd_count() + euclidean_dim(); }
  std::size_t flat_point_offset() const { return 4 * rotation_count(); }
  std::size_t flat_tangent_offset() const { return 3 * rotation_count(); }

  bool is_flat() const { return rotation_count() == 0; }

  std::span<const double> block_weights() const {
    return data_->block_weights;
  }
  /// Metric weight of every tangent coordinate.
  std::span<const double> tangent_weights() const {
    return data_->tangent_weights;
  }

  friend bool operator==(const ManifoldLayout& a, const ManifoldLayout& b);

 private:
  struct Data {
    std::size_t rotations = 0;
    std::size_t spds = 0;
    std::size_t euclidean = 0;
    std::vector<double> block_weights;
    std::vector<double> tangent_weights;
  };
  std::shared_ptr<const Data> data_;
};

class ShapePoint {
 public:
  ShapePoint() = default;
  /// Rotation blocks are renormalized and sign-canonicalized.
  ShapePoint(ManifoldLayout layout, std::vector<double> coords);

  static ShapePoint identity(const ManifoldLayout& layout);

  const ManifoldLayout& layout() const { return layout_; }
  std::span<const double> coords() const { return coords_; }
  std::span<const double> flat() const {
    return std::span<const double>(coords_).subspan(
        layout_.flat_point_offset());
  }

  Eigen::Quaterniond rotation(std::size_t i) const {
    const double* q = coords_.data() + 4 * i;
    return Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
  }
  /// Packed (a, b, c) matrix logarithm of SPD block j.
  std::array<double, 3> spd_log(std::size_t j) const;

 private:
  ManifoldLayout layout_;
  std::vector<double> coords_;
};

class TangentVector {
 public:
  TangentVector() = default;
  explicit TangentVector(ManifoldLayout layout);  // zero vector
  TangentVector(ManifoldLayout layout, std::vector<double> coords);

  const ManifoldLayout& layout() const { return layout_; }
  std::span<const double> coords() const { return coords_; }
  std::span<double> coords() { return coords_; }

  Eigen::Vector3d rotation(std::size_t i) const {
    return Eigen::Vector3d(coords_[3 * i], coords_[3 * i + 1],
                           coords_[3 * i + 2]);
  }

  TangentVector& operator+=(const TangentVector& other);
  TangentVector& operator-=(const TangentVector& other);
  TangentVector& operator*=(double s);

  friend TangentVector operator+(TangentVector a, const TangentVector& b) {
    return a += b;
  }
  friend TangentVector operator-(TangentVector a, const TangentVector& b) {
    return a -= b;
  }
  friend TangentVector operator*(double s, const TangentVector& v);

 private:
  ManifoldLayout layout_;
  std::vector<double> coords_;
};

double metric(const ShapePoint& p, const TangentVector& u,
              const TangentVector& v);
double norm(const ShapePoint& p, const TangentVector& v);

ShapePoint exp(const ShapePoint& p, const TangentVector& v);
/// Throws CutLocus if a rotation block is within kCutLocusMargin of pi.
TangentVector log(const ShapePoint& p, const ShapePoint& q);
double distance(const ShapePoint& p, const ShapePoint& q);

/// Transport along the minimizing geodesic from `from` to `to`.
TangentVector parallel_transport(const TangentVector& v,
                                 const ShapePoint& from, const ShapePoint& to);

/// Arc-length parameterized geodesic t -> Exp_base(t * direction).
class Geodesic {
 public:
  Geodesic() = default;
  /// `direction` must have unit norm at `base` to within 1e-8; it is
  /// renormalized exactly.
  Geodesic(ShapePoint base, TangentVector direction, double length);

  const ShapePoint& base() const { return base_; }
  const TangentVector& direction() const { return direction_; }
  double length() const { return length_; }
  const ManifoldLayout& layout() const { return base_.layout(); }

  /// Any real t is allowed, including values outside [0, length].
  ShapePoint evaluate(double t) const;
  /// Velocity at gamma(t): `direction` transported along the curve itself
  /// (no cut-locus restriction).
  TangentVector velocity(double t) const;
  /// Transport a vector at base() along the curve to gamma(t).
  TangentVector transport(const TangentVector& v, double t) const;

 private:
  ShapePoint base_;
  TangentVector direction_;
  double length_ = 0.0;
};

/// Throws DegenerateGeodesic when the points are closer than 1e-12.
Geodesic geodesic_between(const ShapePoint& p, const ShapePoint& q);

}  // namespace gbs
