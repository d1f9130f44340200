#include "gbs/fcm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <numeric>

#include "gbs/error.hpp"

namespace gbs {
namespace {

struct Frame {
  Eigen::Vector3d e1, e2, normal;
  double area;
};

Frame face_frame(const TriangleMesh& mesh, std::size_t f) {
  const Face& t = mesh.faces[f];
  Frame fr;
  fr.e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
  fr.e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
  const Eigen::Vector3d c = fr.e1.cross(fr.e2);
  fr.area = 0.5 * c.norm();
  fr.normal = fr.area > 0.0 ? Eigen::Vector3d(c / c.norm()) : Eigen::Vector3d::Zero();
  return fr;
}

Eigen::Matrix3d frame_matrix(const Frame& fr) {
  Eigen::Matrix3d m;
  m.col(0) = fr.e1;
  m.col(1) = fr.e2;
  m.col(2) = fr.normal;
  return m;
}

ManifoldLayout make_layout(const TriangleMesh& reference,
                           const MeshTopology& topo,
                           BlockWeighting weighting) {
  const std::size_t n = topo.inner_edge_count();
  const std::size_t m = topo.face_count();
  if (weighting == BlockWeighting::uniform) return ManifoldLayout(n, m, 0);

  std::vector<double> edge_len(n), area(m);
  for (std::size_t e = 0; e < n; ++e) {
    const auto& v = topo.inner_edges[e].vertices;
    edge_len[e] = (reference.vertices[v[1]] - reference.vertices[v[0]]).norm();
  }
  for (std::size_t f = 0; f < m; ++f) area[f] = face_area(reference, f);
  const double mean_len =
      std::accumulate(edge_len.begin(), edge_len.end(), 0.0) / static_cast<double>(n);
  const double mean_area =
      std::accumulate(area.begin(), area.end(), 0.0) / static_cast<double>(m);

  std::vector<double> weights;
  weights.reserve(n + m);
  for (double l : edge_len) weights.push_back(l / mean_len);
  for (double a : area) weights.push_back(a / mean_area);
  return ManifoldLayout(n, m, 0, std::move(weights));
}

}  // namespace

std::array<double, 3> spd_log(const Eigen::Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  const Eigen::Vector2d lambda = es.eigenvalues();
  if (!(lambda.minCoeff() > 0.0))
    throw Error(ErrorCode::InvalidArgument, "matrix is not positive definite");
  const Eigen::Matrix2d& v = es.eigenvectors();
  const Eigen::Matrix2d l =
      v * lambda.array().log().matrix().asDiagonal() * v.transpose();
  return {l(0, 0), 0.5 * (l(0, 1) + l(1, 0)), l(1, 1)};
}

Eigen::Matrix2d spd_exp(const std::array<double, 3>& packed) {
  Eigen::Matrix2d l;
  l << packed[0], packed[1], packed[1], packed[2];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(l);
  const Eigen::Matrix2d& v = es.eigenvectors();
  return v * es.eigenvalues().array().exp().matrix().asDiagonal() * v.transpose();
}

Eigen::Matrix3d polar_rotation(const Eigen::Matrix3d& f) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  Eigen::Vector3d d(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  return u * d.asDiagonal() * v.transpose();
}

FcmEncoder::FcmEncoder(TriangleMesh reference, BlockWeighting weighting)
    : reference_(std::move(reference)),
      topology_(build_topology(reference_)),
      layout_(make_layout(reference_, topology_, weighting)) {
  inverse_frames_.reserve(topology_.face_count());
  tangent_bases_.reserve(topology_.face_count());
  for (std::size_t f = 0; f < topology_.face_count(); ++f) {
    const Frame fr = face_frame(reference_, f);
    inverse_frames_.push_back(frame_matrix(fr).inverse());
    Eigen::Matrix<double, 3, 2> basis;
    basis.col(0) = fr.e1.normalized();
    basis.col(1) = fr.normal.cross(basis.col(0));
    tangent_bases_.push_back(basis);
  }
}

std::vector<Eigen::Matrix3d> FcmEncoder::deformation_gradients(
    const TriangleMesh& subject) const {
  if (subject.vertices.size() != reference_.vertices.size() ||
      subject.faces != reference_.faces)
    throw Error(ErrorCode::TopologyMismatch,
                "subject does not share the reference topology");
  std::vector<Eigen::Matrix3d> grads;
  grads.reserve(topology_.face_count());
  for (std::size_t f = 0; f < topology_.face_count(); ++f) {
    const Frame fr = face_frame(subject, f);
    if (!(fr.area > 1e-12))
      throw Error(ErrorCode::DegenerateFace,
                  "subject face " + std::to_string(f) + " has zero area");
    Eigen::Matrix3d g = frame_matrix(fr) * inverse_frames_[f];
    if (!(g.determinant() > 0.0))
      throw Error(ErrorCode::OrientationFlip,
                  "deformation gradient of face " + std::to_string(f) +
                      " is not orientation preserving");
    grads.push_back(g);
  }
  return grads;
}

ShapePoint FcmEncoder::encode(const TriangleMesh& subject) const {
  const std::vector<Eigen::Matrix3d> grads = deformation_gradients(subject);
  const std::size_t n = topology_.inner_edge_count();
  const std::size_t m = topology_.face_count();

  std::vector<Eigen::Quaterniond> polar(m);
  std::vector<double> coords(layout_.point_size());
  double* spd = coords.data() + layout_.flat_point_offset();
  for (std::size_t f = 0; f < m; ++f) {
    polar[f] = Eigen::Quaterniond(polar_rotation(grads[f]));
    const auto& b = tangent_bases_[f];
    const Eigen::Matrix2d first_form =
        b.transpose() * (grads[f].transpose() * grads[f]) * b;
    const auto packed = spd_log(first_form);
    std::copy(packed.begin(), packed.end(), spd + 3 * f);
  }
  for (std::size_t e = 0; e < n; ++e) {
    const InnerEdge& edge = topology_.inner_edges[e];
    const Eigen::Quaterniond rel =
        polar[edge.face_i].conjugate() * polar[edge.face_j];
    double* q = coords.data() + 4 * e;
    q[0] = rel.w();
    q[1] = rel.x();
    q[2] = rel.y();
    q[3] = rel.z();
  }
  return ShapePoint(layout_, std::move(coords));
}

std::vector<Eigen::Matrix3d> deformation_gradients(const TriangleMesh& reference,
                                                   const TriangleMesh& subject) {
  return FcmEncoder(reference).deformation_gradients(subject);
}

ShapePoint encode(const TriangleMesh& reference, const TriangleMesh& subject) {
  return FcmEncoder(reference).encode(subject);
}

}  // namespace gbs
