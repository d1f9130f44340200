#pragma once

// Geodesic B-score: signed, calibrated arc length of a shape's projection
// onto the geodesic joining the non-OA and OA Fréchet means, with one
// geodesic and one calibration factor per sex. The same code serves curved
// (FCM) and flat (vertex coordinate) layouts; on flat layouts every step is
// the exact Euclidean construction.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gbs/manifold.hpp"
#include "gbs/mesh.hpp"
#include "gbs/procrustes.hpp"
#include "gbs/statistics.hpp"

namespace gbs {

enum class Sex { female, male };

std::string_view to_string(Sex sex);
/// Accepts female/male and F/M (any case). Throws UnknownSex.
Sex parse_sex(std::string_view text);

/// KL grade >= 2.
constexpr bool is_oa(int kl_grade) { return kl_grade >= 2; }

struct SexBranch {
  ShapePoint nonoa_mean;
  Geodesic geodesic;  // passes through nonoa_mean at t = 0
  double lambda = 0.0;
  std::size_t nonoa_count = 0;
  std::size_t oa_count = 0;
};

struct Provenance {
  std::string space;           // "fcm" or "euclidean"
  std::string reference_hash;  // SHA-256 of the reference mesh file, if any
  std::size_t nonoa_count = 0;
  std::size_t oa_count = 0;
};

struct BScoreModel {
  ShapePoint mixed_nonoa_mean;
  ShapePoint oa_mean;
  Geodesic oa_geodesic;
  std::optional<SexBranch> female;
  std::optional<SexBranch> male;
  Provenance provenance;

  const ManifoldLayout& layout() const { return mixed_nonoa_mean.layout(); }
  /// Throws UnknownSex when the model has no branch for `sex`.
  const SexBranch& branch(Sex sex) const;
};

struct ScoredSubject {
  double t = 0.0;
  double b_score = 0.0;
  int projection_iterations = 0;
};

struct FitOptions {
  SolverOptions frechet;
  SolverOptions projection;
};

/// Geodesic from the Fréchet mean of `nonoa` (t = 0) to that of `oa`
/// (t = length).
Geodesic fit_oa_geodesic(std::span<const ShapePoint> nonoa,
                         std::span<const ShapePoint> oa,
                         const FitOptions& options = {});

/// Signed projection parameters of `shapes` onto `gamma`.
std::vector<double> project_all(const Geodesic& gamma,
                                std::span<const ShapePoint> shapes,
                                const SolverOptions& options = {});

/// 1 / population std of the projection parameters of `nonoa`.
/// Throws ZeroVariance when the std is below 1e-14.
double calibrate_lambda(const Geodesic& gamma, std::span<const ShapePoint> nonoa,
                        const SolverOptions& options = {});

/// Translates `gamma` (based at `mixed_nonoa_mean`) to `sex_nonoa_mean` by
/// parallel transport of its direction along the connecting geodesic.
Geodesic sex_specific_geodesic(const Geodesic& gamma,
                               const ShapePoint& mixed_nonoa_mean,
                               const ShapePoint& sex_nonoa_mean);

/// Fits the full model. A sex branch is built for every sex present in
/// `sexes`; each needs at least two non-OA shapes (NonOAGroupTooSmall).
BScoreModel fit_bscore_model(std::span<const ShapePoint> shapes,
                             std::span<const Sex> sexes,
                             std::span<const int> kl_grades,
                             const FitOptions& options = {});

/// b_score = lambda_sex * t, t the projection parameter on the sex's
/// geodesic. For a foot point gamma(t) on an arc-length geodesic,
/// g(gamma'(0), Log_gamma(0) gamma(t)) = t, so no extra Log is taken.
ScoredSubject geodesic_bscore(const BScoreModel& model, const ShapePoint& sigma,
                              Sex sex, const SolverOptions& options = {});

/// Indices whose score lies in [P_lo, P_hi] (percentiles by linear
/// interpolation), ascending. Throws EmptyInput.
std::vector<std::size_t> trim_percentiles(std::span<const double> scores,
                                          double lo, double hi);

/// Vertex coordinates stacked as a flat layout point (x0 y0 z0 x1 ...).
ShapePoint stack_vertices(const TriangleMesh& mesh);

struct EuclideanBaseline {
  BScoreModel model;
  /// Procrustes-aligned, stacked input shapes, in input order.
  std::vector<ShapePoint> points;
};

/// The Euclidean B-score: Procrustes alignment without scaling, then the
/// shared fitting pipeline on stacked vertex coordinates.
EuclideanBaseline euclidean_bscore_model(std::span<const TriangleMesh> meshes,
                                         std::span<const Sex> sexes,
                                         std::span<const int> kl_grades,
                                         const FitOptions& options = {},
                                         const ProcrustesOptions& procrustes = {});

}  // namespace gbs
