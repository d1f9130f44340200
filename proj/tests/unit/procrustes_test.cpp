#include <doctest.h>

#include "gbs/error.hpp"
#include "gbs/procrustes.hpp"
#include "gbs/synth.hpp"
#include "support.hpp"

using namespace gbs;

namespace {

double rmsd(const TriangleMesh& a, const TriangleMesh& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.vertices.size(); ++i)
    s += (a.vertices[i] - b.vertices[i]).squaredNorm();
  return std::sqrt(s / double(a.vertices.size()));
}

std::vector<TriangleMesh> population(Rng& rng, int n) {
  const TriangleMesh ref = ellipsoid_mesh(1, {30, 20, 15});
  std::vector<TriangleMesh> out;
  for (int i = 0; i < n; ++i) {
    TriangleMesh m = ref;
    for (auto& v : m.vertices) v += Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    out.push_back(transformed(m, test::random_rotation(rng).toRotationMatrix(),
                              Eigen::Vector3d(rng.normal(0, 20), rng.normal(0, 20), 0)));
  }
  return out;
}

}  // namespace

TEST_SUITE("procrustes") {

TEST_CASE("optimal rotation recovers a known rotation") {
  Rng rng(1);
  Eigen::Matrix3Xd x = Eigen::Matrix3Xd::Random(3, 30);
  x.colwise() -= x.rowwise().mean();
  const Eigen::Matrix3d r = test::random_rotation(rng).toRotationMatrix();
  const Eigen::Matrix3d got = optimal_rotation(x, r * x);
  CHECK((got - r).norm() < 1e-12);
  CHECK(got.determinant() == doctest::Approx(1.0));
}

TEST_CASE("optimal rotation stays proper for reflected targets") {
  Eigen::Matrix3Xd x = Eigen::Matrix3Xd::Random(3, 20);
  x.colwise() -= x.rowwise().mean();
  Eigen::Matrix3Xd y = x;
  y.row(0) *= -1.0;
  CHECK(optimal_rotation(x, y).determinant() == doctest::Approx(1.0));
}

TEST_CASE("rigidly moved copy aligns exactly") {
  Rng rng(2);
  const TriangleMesh m = population(rng, 1).front();
  const TriangleMesh moved =
      transformed(m, test::random_rotation(rng).toRotationMatrix(), {5, -7, 11});
  const auto out = procrustes_align(std::vector{m, moved});
  CHECK(rmsd(out[0], out[1]) < 1e-9);
}

TEST_CASE("aligned meshes are centered and unscaled") {
  Rng rng(3);
  const auto in = population(rng, 8);
  const auto out = procrustes_align(in);
  for (std::size_t i = 0; i < in.size(); ++i) {
    CHECK(centroid(out[i]).norm() < 1e-10);
    for (std::size_t k = 1; k < in[i].vertices.size(); ++k)
      CHECK((out[i].vertices[k] - out[i].vertices[0]).norm() ==
            doctest::Approx((in[i].vertices[k] - in[i].vertices[0]).norm()).epsilon(1e-12));
  }
}

TEST_CASE("alignment is invariant under pre-rotation of the inputs") {
  Rng rng(4);
  const auto in = population(rng, 6);
  const auto a = procrustes_align(in);
  std::vector<TriangleMesh> moved;
  for (const auto& m : in)
    moved.push_back(transformed(m, test::random_rotation(rng).toRotationMatrix(),
                                Eigen::Vector3d(rng.normal(0, 50), 0, rng.normal(0, 50))));
  const auto b = procrustes_align(moved);
  for (std::size_t i = 0; i < in.size(); ++i) CHECK(rmsd(a[i], b[i]) < 1e-8);
}

TEST_CASE("errors") {
  Rng rng(5);
  auto in = population(rng, 3);
  CHECK(procrustes_align({}).empty());
  TriangleMesh point = in[0];
  for (auto& v : point.vertices) v = Eigen::Vector3d(1, 2, 3);
  CHECK_THROWS_WITH_AS(procrustes_align(std::vector{in[0], point}),
                       doctest::Contains("DegenerateConfiguration"), Error);
  TriangleMesh other = in[1];
  other.vertices.pop_back();
  CHECK_THROWS_WITH_AS(procrustes_align(std::vector{in[0], other}),
                       doctest::Contains("TopologyMismatch"), Error);
  ProcrustesOptions opts;
  opts.max_iter = 1;
  CHECK_THROWS_WITH_AS(procrustes_align(in, opts), doctest::Contains("NotConverged"), Error);
}

}
