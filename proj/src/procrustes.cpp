#include "gbs/procrustes.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "gbs/error.hpp"
#include "gbs/kernels.hpp"

namespace gbs {
namespace {

Eigen::Matrix3Xd centered(const TriangleMesh& mesh, std::size_t index) {
  Eigen::Matrix3Xd x(3, static_cast<Eigen::Index>(mesh.vertices.size()));
  for (std::size_t j = 0; j < mesh.vertices.size(); ++j)
    x.col(static_cast<Eigen::Index>(j)) = mesh.vertices[j];
  x.colwise() -= x.rowwise().mean();
  if (!(x.norm() > 1e-12))
    throw Error(ErrorCode::DegenerateConfiguration,
                "mesh " + std::to_string(index) + " has coincident vertices");
  return x;
}

double rms_movement(const Eigen::Matrix3Xd& a, const Eigen::Matrix3Xd& b) {
  const double ss =
      kernels::active().squared_distance(a.data(), b.data(), static_cast<std::size_t>(a.size()));
  return std::sqrt(ss / static_cast<double>(a.cols()));
}

// Principal axes of a centered configuration, signs fixed by the third
// moment along the first two axes.
Eigen::Matrix3d principal_frame(const Eigen::Matrix3Xd& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(c * c.transpose());
  Eigen::Matrix3d axes;
  for (int k = 0; k < 3; ++k) axes.col(k) = es.eigenvectors().col(2 - k);
  for (int k = 0; k < 2; ++k) {
    const double skew = (axes.col(k).transpose() * c).array().cube().sum();
    if (skew < 0.0) axes.col(k) = -axes.col(k);
  }
  axes.col(2) = axes.col(0).cross(axes.col(1));
  return axes.transpose();
}

}  // namespace

Eigen::Matrix3d optimal_rotation(const Eigen::Matrix3Xd& x,
                                 const Eigen::Matrix3Xd& y) {
  const Eigen::Matrix3d h = x * y.transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  const double d = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return v * Eigen::Vector3d(1.0, 1.0, d).asDiagonal() * u.transpose();
}

std::vector<TriangleMesh> procrustes_align(std::span<const TriangleMesh> meshes,
                                           const ProcrustesOptions& options) {
  if (meshes.empty()) return {};
  for (const auto& m : meshes)
    if (m.vertices.size() != meshes.front().vertices.size() ||
        m.faces != meshes.front().faces)
      throw Error(ErrorCode::TopologyMismatch,
                  "Procrustes alignment needs a shared topology");

  std::vector<Eigen::Matrix3Xd> shapes;
  shapes.reserve(meshes.size());
  for (std::size_t i = 0; i < meshes.size(); ++i)
    shapes.push_back(centered(meshes[i], i));

  std::vector<Eigen::Matrix3Xd> aligned = shapes;
  Eigen::Matrix3Xd consensus = shapes.front();
  bool converged = false;
  for (int iter = 0; iter < options.max_iter && !converged; ++iter) {
    Eigen::Matrix3Xd next = Eigen::Matrix3Xd::Zero(3, consensus.cols());
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      aligned[i] = optimal_rotation(shapes[i], consensus) * shapes[i];
      next += aligned[i];
    }
    next /= static_cast<double>(shapes.size());
    converged = rms_movement(next, consensus) < options.tol;
    consensus = std::move(next);
  }
  if (!converged)
    throw Error(ErrorCode::NotConverged,
                "Procrustes alignment did not settle within " +
                    std::to_string(options.max_iter) + " iterations");

  const Eigen::Matrix3d frame = principal_frame(consensus);
  std::vector<TriangleMesh> out;
  out.reserve(meshes.size());
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    TriangleMesh m;
    m.faces = meshes[i].faces;
    const Eigen::Matrix3Xd x = frame * aligned[i];
    m.vertices.reserve(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) m.vertices.push_back(x.col(j));
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace gbs
