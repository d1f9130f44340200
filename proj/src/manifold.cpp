#include "gbs/manifold.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gbs/error.hpp"
#include "gbs/kernels.hpp"
#include "gbs/rotation.hpp"

namespace gbs {
namespace {

void require_layout(const ManifoldLayout& a, const ManifoldLayout& b,
                    const char* where) {
  if (!(a == b))
    throw Error(ErrorCode::LayoutMismatch,
                std::string(where) + ": operands have different layouts");
}

void store_quaternion(const Eigen::Quaterniond& q, double* out) {
  out[0] = q.w();
  out[1] = q.x();
  out[2] = q.y();
  out[3] = q.z();
}

// Relative rotation p^-1 q of block i, sign-canonicalized.
Eigen::Quaterniond relative(const ShapePoint& p, const ShapePoint& q,
                            std::size_t i) {
  return rotation::canonical(p.rotation(i).conjugate() * q.rotation(i));
}

Eigen::Vector3d checked_log(const Eigen::Quaterniond& rel, std::size_t block) {
  const double theta = rotation::angle(rel);
  if (theta >= std::numbers::pi - kCutLocusMargin) {
    std::ostringstream msg;
    msg << "rotation block " << block << " has relative angle " << theta
        << " (cut locus at pi)";
    throw Error(ErrorCode::CutLocus, msg.str());
  }
  return rotation::log(rel);
}

void store_vector(const Eigen::Vector3d& v, double* out) {
  out[0] = v.x();
  out[1] = v.y();
  out[2] = v.z();
}

}  // namespace

// --- ManifoldLayout ---------------------------------------------------------

ManifoldLayout::ManifoldLayout() : ManifoldLayout(0, 0, 0) {}

ManifoldLayout::ManifoldLayout(std::size_t rotation_count,
                               std::size_t spd_count,
                               std::size_t euclidean_dim,
                               std::vector<double> block_weights) {
  const std::size_t blocks =
      rotation_count + spd_count + (euclidean_dim > 0 ? 1 : 0);
  if (block_weights.empty()) block_weights.assign(blocks, 1.0);
  if (block_weights.size() != blocks)
    throw Error(ErrorCode::InvalidArgument,
                "expected " + std::to_string(blocks) + " block weights, got " +
                    std::to_string(block_weights.size()));
  for (double w : block_weights)
    if (!(w > 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::InvalidArgument,
                  "block weights must be positive and finite");

  auto data = std::make_shared<Data>();
  data->rotations = rotation_count;
  data->spds = spd_count;
  data->euclidean = euclidean_dim;
  data->block_weights = std::move(block_weights);

  auto& tw = data->tangent_weights;
  tw.reserve(3 * rotation_count + 3 * spd_count + euclidean_dim);
  std::size_t b = 0;
  for (std::size_t i = 0; i < rotation_count; ++i, ++b)
    tw.insert(tw.end(), 3, data->block_weights[b]);
  for (std::size_t j = 0; j < spd_count; ++j, ++b) {
    const double w = data->block_weights[b];
    tw.push_back(w);
    tw.push_back(2.0 * w);  // off-diagonal entry appears twice in Frobenius
    tw.push_back(w);
  }
  if (euclidean_dim > 0) tw.insert(tw.end(), euclidean_dim, data->block_weights[b]);
  data_ = std::move(data);
}

ManifoldLayout ManifoldLayout::euclidean(std::size_t dim) {
  return ManifoldLayout(0, 0, dim);
}

bool operator==(const ManifoldLayout& a, const ManifoldLayout& b) {
  if (a.data_ == b.data_) return true;
  return a.data_->rotations == b.data_->rotations &&
         a.data_->spds == b.data_->spds &&
         a.data_->euclidean == b.data_->euclidean &&
         a.data_->block_weights == b.data_->block_weights;
}

// --- ShapePoint -------------------------------------------------------------

ShapePoint::ShapePoint(ManifoldLayout layout, std::vector<double> coords)
    : layout_(std::move(layout)), coords_(std::move(coords)) {
  if (coords_.size() != layout_.point_size())
    throw Error(ErrorCode::LayoutMismatch,
                "point has " + std::to_string(coords_.size()) +
                    " coordinates, layout expects " +
                    std::to_string(layout_.point_size()));
  for (std::size_t i = 0; i < layout_.rotation_count(); ++i) {
    Eigen::Quaterniond q = rotation(i);
    const double n = q.norm();
    if (!(n > 0.0) || !std::isfinite(n))
      throw Error(ErrorCode::InvalidArgument,
                  "rotation block " + std::to_string(i) +
                      " is not a valid quaternion");
    if (std::abs(n - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) q.coeffs() /= n;
    store_quaternion(rotation::canonical(q), coords_.data() + 4 * i);
  }
}

ShapePoint ShapePoint::identity(const ManifoldLayout& layout) {
  std::vector<double> coords(layout.point_size(), 0.0);
  for (std::size_t i = 0; i < layout.rotation_count(); ++i) coords[4 * i] = 1.0;
  return ShapePoint(layout, std::move(coords));
}

std::array<double, 3> ShapePoint::spd_log(std::size_t j) const {
  const double* s = coords_.data() + layout_.flat_point_offset() + 3 * j;
  return {s[0], s[1], s[2]};
}

// --- TangentVector ----------------------------------------------------------

TangentVector::TangentVector(ManifoldLayout layout)
    : layout_(std::move(layout)), coords_(layout_.tangent_size(), 0.0) {}

TangentVector::TangentVector(ManifoldLayout layout, std::vector<double> coords)
    : layout_(std::move(layout)), coords_(std::move(coords)) {
  if (coords_.size() != layout_.tangent_size())
    throw Error(ErrorCode::LayoutMismatch,
                "tangent has " + std::to_string(coords_.size()) +
                    " coordinates, layout expects " +
                    std::to_string(layout_.tangent_size()));
}

TangentVector& TangentVector::operator+=(const TangentVector& other) {
  require_layout(layout_, other.layout_, "tangent +");
  kernels::active().add(coords_.data(), other.coords_.data(), coords_.data(),
                        coords_.size());
  return *this;
}

TangentVector& TangentVector::operator-=(const TangentVector& other) {
  require_layout(layout_, other.layout_, "tangent -");
  kernels::active().sub(coords_.data(), other.coords_.data(), coords_.data(),
                        coords_.size());
  return *this;
}

TangentVector& TangentVector::operator*=(double s) {
  kernels::active().scale(s, coords_.data(), coords_.data(), coords_.size());
  return *this;
}

TangentVector operator*(double s, const TangentVector& v) {
  TangentVector out = v;
  out *= s;
  return out;
}

// --- Riemannian operations --------------------------------------------------

double metric(const ShapePoint& p, const TangentVector& u,
              const TangentVector& v) {
  require_layout(p.layout(), u.layout(), "metric");
  require_layout(p.layout(), v.layout(), "metric");
  return kernels::active().weighted_dot(p.layout().tangent_weights().data(),
                                        u.coords().data(), v.coords().data(),
                                        u.coords().size());
}

double norm(const ShapePoint& p, const TangentVector& v) {
  return std::sqrt(metric(p, v, v));
}

ShapePoint exp(const ShapePoint& p, const TangentVector& v) {
  require_layout(p.layout(), v.layout(), "exp");
  const ManifoldLayout& layout = p.layout();
  std::vector<double> out(layout.point_size());
  for (std::size_t i = 0; i < layout.rotation_count(); ++i)
    store_quaternion(p.rotation(i) * rotation::exp(v.rotation(i)),
                     out.data() + 4 * i);
  kernels::active().add(p.flat().data(),
                        v.coords().data() + layout.flat_tangent_offset(),
                        out.data() + layout.flat_point_offset(),
                        layout.flat_size());
  return ShapePoint(layout, std::move(out));
}

TangentVector log(const ShapePoint& p, const ShapePoint& q) {
  require_layout(p.layout(), q.layout(), "log");
  const ManifoldLayout& layout = p.layout();
  std::vector<double> out(layout.tangent_size());
  for (std::size_t i = 0; i < layout.rotation_count(); ++i)
    store_vector(checked_log(relative(p, q, i), i), out.data() + 3 * i);
  kernels::active().sub(q.flat().data(), p.flat().data(),
                        out.data() + layout.flat_tangent_offset(),
                        layout.flat_size());
  return TangentVector(layout, std::move(out));
}

double distance(const ShapePoint& p, const ShapePoint& q) {
  return norm(p, log(p, q));
}

TangentVector parallel_transport(const TangentVector& v,
                                 const ShapePoint& from,
                                 const ShapePoint& to) {
  require_layout(from.layout(), v.layout(), "parallel_transport");
  require_layout(from.layout(), to.layout(), "parallel_transport");
  TangentVector out = v;
  // Bi-invariant transport along from * exp(s xi): body coordinates are
  // rotated by exp(-xi / 2). Flat blocks are unchanged.
  for (std::size_t i = 0; i < from.layout().rotation_count(); ++i) {
    const Eigen::Vector3d xi = checked_log(relative(from, to, i), i);
    const Eigen::Vector3d moved = rotation::exp(-0.5 * xi) * v.rotation(i);
    store_vector(moved, out.coords().data() + 3 * i);
  }
  return out;
}

// --- Geodesic ---------------------------------------------------------------

Geodesic::Geodesic(ShapePoint base, TangentVector direction, double length)
    : base_(std::move(base)), direction_(std::move(direction)), length_(length) {
  require_layout(base_.layout(), direction_.layout(), "Geodesic");
  if (!(length_ >= 0.0) || !std::isfinite(length_))
    throw Error(ErrorCode::InvalidArgument,
                "geodesic length must be finite and non-negative");
  const double n = norm(base_, direction_);
  if (std::abs(n - 1.0) > 1e-8)
    throw Error(ErrorCode::InvalidArgument,
                "geodesic direction must have unit norm, got " +
                    std::to_string(n));
  direction_ *= 1.0 / n;
}

ShapePoint Geodesic::evaluate(double t) const {
  return exp(base_, t * direction_);
}

TangentVector Geodesic::transport(const TangentVector& v, double t) const {
  require_layout(layout(), v.layout(), "Geodesic::transport");
  TangentVector out = v;
  for (std::size_t i = 0; i < layout().rotation_count(); ++i) {
    const Eigen::Vector3d xi = t * direction_.rotation(i);
    store_vector(rotation::exp(-0.5 * xi) * v.rotation(i),
                 out.coords().data() + 3 * i);
  }
  return out;
}

TangentVector Geodesic::velocity(double t) const {
  return transport(direction_, t);
}

Geodesic geodesic_between(const ShapePoint& p, const ShapePoint& q) {
  TangentVector v = log(p, q);
  const double length = norm(p, v);
  if (length < 1e-12)
    throw Error(ErrorCode::DegenerateGeodesic,
                "end points coincide (distance " + std::to_string(length) + ")");
  v *= 1.0 / length;
  return Geodesic(p, std::move(v), length);
}

}  // namespace gbs
