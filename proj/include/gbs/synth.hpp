#pragma once

// Synthetic cohorts with known ground truth. Subjects are drawn as
//   x_i = Exp_{m_s}(t_i w_s + eps_i)
// with m_s the non-OA mean of sex s, w_s the OA direction transported to
// m_s and eps_i tangent noise orthogonal to w_s. Mesh mode instead applies
// smooth displacement fields to a reference ellipsoid, because shape-space
// points cannot be decoded back into meshes.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gbs/cohort.hpp"
#include "gbs/fcm.hpp"
#include "gbs/manifold.hpp"
#include "gbs/mesh.hpp"

namespace gbs {

struct SyntheticSpec {
  std::string mode = "archive";  // "archive" (shape-space points) or "mesh"
  std::string space = "fcm";     // archive mode: "fcm" or "euclidean"
  int subdivisions = 2;          // of the reference icosphere
  std::array<double, 3> radii = {30.0, 20.0, 15.0};  // mm
  BlockWeighting weighting = BlockWeighting::uniform;

  /// Subjects per sex (index 0 female, 1 male).
  std::array<std::size_t, 2> nonoa = {100, 100};
  std::array<std::size_t, 2> oa = {100, 100};

  /// Mean raw score per KL grade 0..4, in units of 1/lambda before the
  /// per-sex standardization. Non-OA subjects are KL 0 and 1 in a 2:1 ratio,
  /// OA subjects KL 2, 3 and 4 in equal shares.
  std::array<double, 5> kl_t_means = {-0.2, 0.4, 2.5, 4.0, 6.0};
  double t_sd = 1.0;

  double lambda = 1.0;
  /// Norm of each sex's offset from the common mean (orthogonal to w).
  /// In mesh mode, the amplitude of the sex displacement field in mm.
  double sex_offset = 0.5;
  /// RMS norm of the tangent noise; in mesh mode, mm of displacement.
  double noise = 0.1;
  /// Norm of the random offset of the common mean from the reference.
  double mean_spread = 0.3;

  double beta0 = -4.0;
  double beta1 = 0.8;
  double right_fraction = 0.5;  // mesh mode: share of right knees
  std::uint64_t seed = 1;

  /// Throws InvalidSpec.
  void validate() const;
};

struct SyntheticCohort {
  SyntheticSpec spec;
  TriangleMesh reference;
  std::vector<SubjectRecord> records;
  /// Intended raw score of every subject; lambda * t is the true B-score.
  std::vector<double> t;

  // archive mode
  ManifoldLayout layout;
  std::optional<ShapePoint> common_mean;
  std::optional<TangentVector> direction;  // unit, at common_mean
  std::array<std::optional<ShapePoint>, 2> sex_means;
  std::vector<ShapePoint> points;

  // mesh mode, already mirrored (right knees) and rigidly moved
  std::vector<TriangleMesh> meshes;
};

/// Ellipsoid triangulated as a subdivided icosahedron, outward oriented.
TriangleMesh ellipsoid_mesh(int subdivisions, const std::array<double, 3>& radii);

/// Fully determined by spec.seed.
SyntheticCohort generate_synthetic(const SyntheticSpec& spec);

/// Writes reference.off, cohort.csv, truth.json and either archive.gbsa
/// (archive mode) or meshes/<id>.off into `dir`.
void write_synthetic(const SyntheticCohort& cohort, const std::filesystem::path& dir);

}  // namespace gbs
