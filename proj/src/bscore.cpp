#include "gbs/bscore.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "gbs/error.hpp"
#include "gbs/parallel.hpp"

namespace gbs {

std::string_view to_string(Sex sex) {
  return sex == Sex::female ? "female" : "male";
}

Sex parse_sex(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "female" || s == "f") return Sex::female;
  if (s == "male" || s == "m") return Sex::male;
  throw Error(ErrorCode::UnknownSex, "unknown sex label '" + std::string(text) + "'");
}

const SexBranch& BScoreModel::branch(Sex sex) const {
  const auto& b = sex == Sex::female ? female : male;
  if (!b)
    throw Error(ErrorCode::UnknownSex,
                "model has no " + std::string(to_string(sex)) + " reference");
  return *b;
}

Geodesic fit_oa_geodesic(std::span<const ShapePoint> nonoa,
                         std::span<const ShapePoint> oa,
                         const FitOptions& options) {
  if (nonoa.empty() || oa.empty())
    throw Error(ErrorCode::InsufficientData,
                "OA-geodesic needs non-empty non-OA and OA cohorts");
  const ShapePoint healthy = frechet_mean(nonoa, options.frechet).mean;
  const ShapePoint diseased = frechet_mean(oa, options.frechet).mean;
  return geodesic_between(healthy, diseased);
}

std::vector<double> project_all(const Geodesic& gamma,
                                std::span<const ShapePoint> shapes,
                                const SolverOptions& options) {
  std::vector<double> t(shapes.size());
  parallel_for(shapes.size(), options.workers, [&](std::size_t i) {
    t[i] = project_to_geodesic(gamma, shapes[i], options).t;
  });
  return t;
}

double calibrate_lambda(const Geodesic& gamma, std::span<const ShapePoint> nonoa,
                        const SolverOptions& options) {
  if (nonoa.size() < 2)
    throw Error(ErrorCode::InsufficientData,
                "calibration needs at least 2 non-OA shapes");
  const std::vector<double> t = project_all(gamma, nonoa, options);
  const double sd = tangent_std(t);
  if (!(sd >= 1e-14))
    throw Error(ErrorCode::ZeroVariance,
                "non-OA projections have zero spread");
  return 1.0 / sd;
}

Geodesic sex_specific_geodesic(const Geodesic& gamma,
                               const ShapePoint& mixed_nonoa_mean,
                               const ShapePoint& sex_nonoa_mean) {
  TangentVector direction =
      parallel_transport(gamma.direction(), mixed_nonoa_mean, sex_nonoa_mean);
  return Geodesic(sex_nonoa_mean, std::move(direction), gamma.length());
}

BScoreModel fit_bscore_model(std::span<const ShapePoint> shapes,
                             std::span<const Sex> sexes,
                             std::span<const int> kl_grades,
                             const FitOptions& options) {
  if (shapes.size() != sexes.size() || shapes.size() != kl_grades.size())
    throw Error(ErrorCode::InvalidArgument,
                "shapes, sexes and KL grades must have equal length");

  std::vector<ShapePoint> nonoa, oa;
  for (std::size_t i = 0; i < shapes.size(); ++i)
    (is_oa(kl_grades[i]) ? oa : nonoa).push_back(shapes[i]);

  if (nonoa.empty() || oa.empty())
    throw Error(ErrorCode::InsufficientData,
                "OA-geodesic needs non-empty non-OA and OA cohorts");
  BScoreModel model;
  model.mixed_nonoa_mean = frechet_mean(nonoa, options.frechet).mean;
  model.oa_mean = frechet_mean(oa, options.frechet).mean;
  model.oa_geodesic = geodesic_between(model.mixed_nonoa_mean, model.oa_mean);
  const Geodesic& gamma = model.oa_geodesic;
  model.provenance.nonoa_count = nonoa.size();
  model.provenance.oa_count = oa.size();

  for (Sex sex : {Sex::female, Sex::male}) {
    std::vector<ShapePoint> sex_nonoa;
    std::size_t present = 0, sex_oa = 0;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      if (sexes[i] != sex) continue;
      ++present;
      if (is_oa(kl_grades[i])) ++sex_oa;
      else sex_nonoa.push_back(shapes[i]);
    }
    if (present == 0) continue;
    if (sex_nonoa.size() < 2)
      throw Error(ErrorCode::NonOAGroupTooSmall,
                  std::string(to_string(sex)) + " non-OA group has " +
                      std::to_string(sex_nonoa.size()) +
                      " shapes, calibration needs 2");

    SexBranch branch;
    branch.nonoa_mean = frechet_mean(sex_nonoa, options.frechet).mean;
    branch.geodesic =
        sex_specific_geodesic(gamma, model.mixed_nonoa_mean, branch.nonoa_mean);
    branch.lambda = calibrate_lambda(branch.geodesic, sex_nonoa, options.projection);
    branch.nonoa_count = sex_nonoa.size();
    branch.oa_count = sex_oa;
    (sex == Sex::female ? model.female : model.male) = std::move(branch);
  }
  return model;
}

ScoredSubject geodesic_bscore(const BScoreModel& model, const ShapePoint& sigma,
                              Sex sex, const SolverOptions& options) {
  const SexBranch& branch = model.branch(sex);
  const ProjectionResult proj = project_to_geodesic(branch.geodesic, sigma, options);
  return {proj.t, branch.lambda * proj.t, proj.iterations};
}

std::vector<std::size_t> trim_percentiles(std::span<const double> scores,
                                          double lo, double hi) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no scores to trim");
  if (!(lo >= 0.0 && lo < hi && hi <= 100.0))
    throw Error(ErrorCode::InvalidArgument,
                "trim range needs 0 <= lo < hi <= 100");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const double p_lo = percentile_sorted(sorted, lo);
  const double p_hi = percentile_sorted(sorted, hi);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] >= p_lo && scores[i] <= p_hi) kept.push_back(i);
  return kept;
}

ShapePoint stack_vertices(const TriangleMesh& mesh) {
  std::vector<double> coords;
  coords.reserve(3 * mesh.vertices.size());
  for (const auto& v : mesh.vertices) coords.insert(coords.end(), {v.x(), v.y(), v.z()});
  ManifoldLayout layout = ManifoldLayout::euclidean(coords.size());
  return ShapePoint(std::move(layout), std::move(coords));
}

EuclideanBaseline euclidean_bscore_model(std::span<const TriangleMesh> meshes,
                                         std::span<const Sex> sexes,
                                         std::span<const int> kl_grades,
                                         const FitOptions& options,
                                         const ProcrustesOptions& procrustes) {
  const std::vector<TriangleMesh> aligned = procrustes_align(meshes, procrustes);
  EuclideanBaseline out;
  out.points.reserve(aligned.size());
  for (const auto& m : aligned) out.points.push_back(stack_vertices(m));
  // one shared layout object for all points
  if (!out.points.empty()) {
    const ManifoldLayout layout = out.points.front().layout();
    for (auto& p : out.points)
      p = ShapePoint(layout, std::vector<double>(p.coords().begin(), p.coords().end()));
  }
  out.model = fit_bscore_model(out.points, sexes, kl_grades, options);
  out.model.provenance.space = "euclidean";
  return out;
}

}  // namespace gbs
