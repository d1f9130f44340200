// Acceptance checks for the geodesic B-score library. Prints one
// PASS/FAIL line per criterion and exits non-zero if any fails.

#include <Eigen/Geometry>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "flat_oracle.hpp"
#include "gbs/bscore.hpp"
#include "gbs/cohort.hpp"
#include "gbs/error.hpp"
#include "gbs/fcm.hpp"
#include "gbs/pipeline.hpp"
#include "gbs/synth.hpp"
#include "support.hpp"

using namespace gbs;

namespace {

// Criterion 1
constexpr double kProjectionTol = 1e-10;
constexpr double kMaxMeanIterations = 4.0;
constexpr int kMaxIterations = 6;
constexpr double kQuadraticC = 100.0;
constexpr double kTerminalUpper = 0.1;  // |delta_i| below this is terminal
constexpr double kConvergenceNoise = 0.5;
constexpr double kConvergenceSeconds = 10.0;
// Criterion 2
constexpr double kFlatTol = 1e-10;
constexpr double kFlatSeconds = 5.0;
// Criterion 3
constexpr double kCalibrationTol = 1e-9;
// Criterion 4
constexpr double kRigidTol = 1e-8;
// Criterion 5
constexpr double kMaxAngleDeg = 2.0;
constexpr double kMinPearson = 0.99;
// Criterion 6
constexpr double kRoundTripTol = 1e-9;
constexpr double kIsometryTol = 1e-10;
constexpr double kSpdDistanceTol = 1e-12;
constexpr double kMidpointTol = 1e-10;
// Criterion 7
constexpr double kCoefficientSe = 3.0;
constexpr double kMaxMannWhitneyP = 1e-3;
constexpr double kRiskSeconds = 30.0;
// Criterion 9
constexpr double kParallelTol = 1e-12;
constexpr double kUnitTol = 1e-10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Labels {
  std::vector<Sex> sexes;
  std::vector<int> kl;
};

Labels labels(const SyntheticCohort& c) {
  Labels l;
  for (const auto& r : c.records) {
    l.sexes.push_back(r.sex);
    l.kl.push_back(r.kl_grade);
  }
  return l;
}

SyntheticSpec cohort_spec(std::size_t per_sex_group, double noise, std::uint64_t seed) {
  SyntheticSpec s;
  s.nonoa = {per_sex_group, per_sex_group};
  s.oa = {per_sex_group, per_sex_group};
  s.noise = noise;
  s.seed = seed;
  return s;
}

Outcome projection_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const SyntheticCohort c = generate_synthetic(cohort_spec(25, kConvergenceNoise, 101));
  const Labels l = labels(c);
  const BScoreModel m = fit_bscore_model(c.points, l.sexes, l.kl);
  SolverOptions opts;
  opts.tol = kProjectionTol;

  int converged = 0, max_iter = 0;
  double sum_iter = 0.0, worst_c = 0.0, worst_rate = 0.0;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    try {
      const ProjectionResult r =
          project_to_geodesic(m.branch(l.sexes[i]).geodesic, c.points[i], opts);
      ++converged;
      sum_iter += r.iterations;
      max_iter = std::max(max_iter, r.iterations);
      // applied steps only; the final sub-tolerance estimate is a stopping probe
      for (std::size_t k = 0; k + 1 < r.steps.size(); ++k) {
        const double d = std::abs(r.steps[k]), next = std::abs(r.steps[k + 1]);
        if (d < kTerminalUpper && next >= kProjectionTol)
          worst_c = std::max(worst_c, next / (d * d));
        if (d > 0.0) worst_rate = std::max(worst_rate, next / d);
      }
    } catch (const Error&) {
    }
  }
  const double secs = seconds_since(t0);
  const double mean_iter = sum_iter / std::max(converged, 1);
  const bool pass = converged == 100 && mean_iter <= kMaxMeanIterations &&
                    max_iter <= kMaxIterations && worst_c <= kQuadraticC &&
                    secs < kConvergenceSeconds;
  return {pass, fmt("converged %d/100, mean iterations %.2f, max %d, max |d_i+1|/|d_i|^2 %.3g "
                    "(C %.0f), max |d_i+1|/|d_i| %.3g, %.2f s",
                    converged, mean_iter, max_iter, worst_c, kQuadraticC, worst_rate, secs)};
}

Outcome flat_consistency() {
  const auto t0 = std::chrono::steady_clock::now();
  SyntheticSpec s = cohort_spec(50, 0.3, 202);
  s.space = "euclidean";
  const SyntheticCohort c = generate_synthetic(s);
  const Labels l = labels(c);
  const BScoreModel m = fit_bscore_model(c.points, l.sexes, l.kl);

  std::vector<Eigen::VectorXd> x;
  std::vector<int> sex;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const auto co = c.points[i].coords();
    x.emplace_back(Eigen::Map<const Eigen::VectorXd>(co.data(), Eigen::Index(co.size())));
    sex.push_back(l.sexes[i] == Sex::female ? 0 : 1);
  }
  const test::FlatOracle o = test::flat_oracle(x, sex, l.kl);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.points.size(); ++i)
    worst = std::max(worst, std::abs(geodesic_bscore(m, c.points[i], l.sexes[i]).b_score - o.b[i]));

  // the mesh baseline (Procrustes, then the shared pipeline) against the
  // same closed form on its aligned coordinates
  SyntheticSpec ms = cohort_spec(50, 0.5, 203);
  ms.mode = "mesh";
  ms.subdivisions = 1;
  const SyntheticCohort mc = generate_synthetic(ms);
  const Labels ml = labels(mc);
  std::vector<TriangleMesh> left;
  for (std::size_t i = 0; i < mc.meshes.size(); ++i)
    left.push_back(mc.records[i].needs_mirroring()
                       ? to_left(mc.meshes[i], mc.reference, Eigen::Vector3d::UnitX())
                       : mc.meshes[i]);
  const EuclideanBaseline base = euclidean_bscore_model(left, ml.sexes, ml.kl);
  std::vector<Eigen::VectorXd> y;
  std::vector<int> msex;
  for (std::size_t i = 0; i < base.points.size(); ++i) {
    const auto co = base.points[i].coords();
    y.emplace_back(Eigen::Map<const Eigen::VectorXd>(co.data(), Eigen::Index(co.size())));
    msex.push_back(ml.sexes[i] == Sex::female ? 0 : 1);
  }
  const test::FlatOracle mo = test::flat_oracle(y, msex, ml.kl);
  double worst_mesh = 0.0;
  for (std::size_t i = 0; i < base.points.size(); ++i)
    worst_mesh = std::max(
        worst_mesh,
        std::abs(geodesic_bscore(base.model, base.points[i], ml.sexes[i]).b_score - mo.b[i]));

  const double secs = seconds_since(t0);
  return {worst < kFlatTol && worst_mesh < kFlatTol && secs < kFlatSeconds,
          fmt("N=%zu max |B_geo - B_euc| %.3g, mesh baseline N=%zu %.3g, %.2f s",
              c.points.size(), worst, base.points.size(), worst_mesh, secs)};
}

Outcome calibration_identity() {
  const SyntheticCohort c = generate_synthetic(cohort_spec(60, 0.2, 303));
  const Labels l = labels(c);
  const BScoreModel m = fit_bscore_model(c.points, l.sexes, l.kl);
  double worst_std = 0.0, worst_mean = 0.0;
  for (Sex s : {Sex::female, Sex::male}) {
    std::vector<double> b;
    for (std::size_t i = 0; i < c.points.size(); ++i)
      if (l.sexes[i] == s && !is_oa(l.kl[i]))
        b.push_back(geodesic_bscore(m, c.points[i], s).b_score);
    double mean = 0.0, sq = 0.0;
    for (double v : b) mean += v;
    mean /= double(b.size());
    for (double v : b) sq += (v - mean) * (v - mean);
    worst_std = std::max(worst_std, std::abs(std::sqrt(sq / double(b.size())) - 1.0));
    worst_mean = std::max(worst_mean,
                          std::abs(geodesic_bscore(m, m.branch(s).nonoa_mean, s).b_score));
  }
  return {worst_std < kCalibrationTol && worst_mean < kCalibrationTol,
          fmt("max |std - 1| %.3g, max |B(sex mean)| %.3g", worst_std, worst_mean)};
}

Outcome rigid_invariance() {
  SyntheticSpec s = cohort_spec(20, 0.5, 404);
  s.mode = "mesh";
  const SyntheticCohort c = generate_synthetic(s);
  const Labels l = labels(c);
  const FcmEncoder enc(c.reference);
  std::vector<TriangleMesh> left;
  std::vector<ShapePoint> pts;
  for (std::size_t i = 0; i < c.meshes.size(); ++i) {
    left.push_back(c.records[i].needs_mirroring()
                       ? to_left(c.meshes[i], c.reference, Eigen::Vector3d::UnitX())
                       : c.meshes[i]);
    pts.push_back(enc.encode(left.back()));
  }
  const BScoreModel m = fit_bscore_model(pts, l.sexes, l.kl);

  Rng rng(405);
  double spread = 0.0;
  for (std::size_t subject : {std::size_t(3), std::size_t(50)}) {
    const double b0 = geodesic_bscore(m, pts[subject], l.sexes[subject]).b_score;
    for (int k = 0; k < 20; ++k) {
      const Eigen::Matrix3d r = test::random_rotation(rng).toRotationMatrix();
      const Eigen::Vector3d t(rng.normal(0, 100), rng.normal(0, 100), rng.normal(0, 100));
      const ShapePoint p = enc.encode(transformed(left[subject], r, t));
      spread = std::max(spread, std::abs(geodesic_bscore(m, p, l.sexes[subject]).b_score - b0));
    }
  }
  return {spread < kRigidTol, fmt("max B-score change over 20 motions %.3g", spread)};
}

Outcome ground_truth_recovery() {
  const SyntheticCohort c = generate_synthetic(cohort_spec(100, 0.1, 505));
  const Labels l = labels(c);
  const BScoreModel m = fit_bscore_model(c.points, l.sexes, l.kl);

  const TangentVector fitted =
      parallel_transport(m.oa_geodesic.direction(), m.mixed_nonoa_mean, *c.common_mean);
  const double cosine = metric(*c.common_mean, fitted, *c.direction) /
                        (norm(*c.common_mean, fitted) * norm(*c.common_mean, *c.direction));
  const double angle = std::acos(std::clamp(cosine, -1.0, 1.0)) * 180.0 / std::numbers::pi;

  std::vector<double> b;
  for (std::size_t i = 0; i < c.points.size(); ++i)
    b.push_back(geodesic_bscore(m, c.points[i], l.sexes[i]).b_score);
  const double n = double(b.size());
  double mb = 0, mt = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    mb += b[i] / n;
    mt += c.t[i] / n;
  }
  double sbt = 0, sbb = 0, stt = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    sbt += (b[i] - mb) * (c.t[i] - mt);
    sbb += (b[i] - mb) * (b[i] - mb);
    stt += (c.t[i] - mt) * (c.t[i] - mt);
  }
  const double r = sbt / std::sqrt(sbb * stt);
  return {angle < kMaxAngleDeg && r > kMinPearson,
          fmt("direction error %.3f deg, Pearson r %.5f", angle, r)};
}

Outcome manifold_oracles() {
  Rng rng(606);
  double round_trip = 0.0, isometry = 0.0;
  for (const ManifoldLayout& layout :
       {ManifoldLayout(1, 0, 0), ManifoldLayout(0, 1, 0), ManifoldLayout(0, 0, 3)}) {
    for (int k = 0; k < 1000; ++k) {
      const ShapePoint p = test::random_point(layout, rng);
      const TangentVector v = test::random_tangent(layout, rng);
      const TangentVector back = log(p, exp(p, v));
      round_trip = std::max(round_trip, test::max_abs_diff(back.coords(), v.coords()));

      const ShapePoint q = exp(p, test::random_tangent(layout, rng));
      const TangentVector a = test::random_tangent(layout, rng);
      const TangentVector b = test::random_tangent(layout, rng);
      const double before = metric(p, a, b);
      const double after = metric(q, parallel_transport(a, p, q), parallel_transport(b, p, q));
      isometry = std::max(isometry, std::abs(after - before) / std::max(1.0, std::abs(before)));
    }
  }

  const ManifoldLayout spd(0, 1, 0);
  const auto e = spd_log(Eigen::Vector2d(std::numbers::e, std::numbers::e).asDiagonal());
  const double d = distance(ShapePoint::identity(spd), ShapePoint(spd, {e[0], e[1], e[2]}));
  const double spd_err = std::abs(d - std::numbers::sqrt2);

  const ManifoldLayout so3(1, 0, 0);
  const Eigen::Quaterniond half(Eigen::AngleAxisd(std::numbers::pi / 2, Eigen::Vector3d::UnitZ()));
  const Eigen::Quaterniond quarter(
      Eigen::AngleAxisd(std::numbers::pi / 4, Eigen::Vector3d::UnitZ()));
  const Geodesic g = geodesic_between(ShapePoint::identity(so3),
                                      ShapePoint(so3, {half.w(), half.x(), half.y(), half.z()}));
  const ShapePoint mid = g.evaluate(0.5 * g.length());
  const double mid_err =
      distance(mid, ShapePoint(so3, {quarter.w(), quarter.x(), quarter.y(), quarter.z()}));

  return {round_trip < kRoundTripTol && isometry < kIsometryTol && spd_err < kSpdDistanceTol &&
              mid_err < kMidpointTol,
          fmt("round trip %.3g, isometry %.3g, |d(I, eI) - sqrt2| %.3g, midpoint %.3g",
              round_trip, isometry, spd_err, mid_err)};
}

Outcome risk_model() {
  const auto t0 = std::chrono::steady_clock::now();
  SyntheticSpec s = cohort_spec(500, 0.1, 707);
  s.subdivisions = 1;
  s.beta0 = -4.0;
  s.beta1 = 0.8;
  const SyntheticCohort c = generate_synthetic(s);
  const Labels l = labels(c);
  const BScoreModel m = fit_bscore_model(c.points, l.sexes, l.kl);
  std::vector<double> b;
  for (std::size_t i = 0; i < c.points.size(); ++i)
    b.push_back(geodesic_bscore(m, c.points[i], l.sexes[i]).b_score);
  std::vector<double> kept_b;
  std::vector<bool> y;
  for (std::size_t i : trim_percentiles(b, 0.75, 99.25)) {
    kept_b.push_back(b[i]);
    y.push_back(*c.records[i].tkr_within_8y);
  }
  const LogisticModel fit = fit_logistic(kept_b, y);
  std::vector<double> risk_tkr, risk_non;
  for (std::size_t i = 0; i < kept_b.size(); ++i)
    (y[i] ? risk_tkr : risk_non).push_back(predict_risk(fit, kept_b[i]));
  const double med_tkr = risk_summary(risk_tkr).median;
  const double med_non = risk_summary(risk_non).median;
  const MannWhitneyResult mw = mann_whitney_u(risk_tkr, risk_non);
  const double z0 = std::abs(fit.beta0 - s.beta0) / fit.se_beta0;
  const double z1 = std::abs(fit.beta1 - s.beta1) / fit.se_beta1;
  const double secs = seconds_since(t0);
  return {z0 < kCoefficientSe && z1 < kCoefficientSe && med_tkr > med_non &&
              mw.p_value < kMaxMannWhitneyP && secs < kRiskSeconds,
          fmt("N=%zu, beta0 %.3f (%.2f SE), beta1 %.3f (%.2f SE), median risk %.3f vs %.3f, "
              "p %.3g, %.2f s",
              c.points.size(), fit.beta0, z0, fit.beta1, z1, med_tkr, med_non, mw.p_value, secs)};
}

Outcome mann_whitney_exactness() {
  Rng rng(808);
  int matches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(2 + rng.below(49)), b(2 + rng.below(49));
    const std::uint64_t range = 2 + rng.below(30);
    for (double& v : a) v = double(rng.below(range));
    for (double& v : b) v = double(rng.below(range));
    double brute = 0.0;
    for (double x : a)
      for (double z : b) brute += x > z ? 1.0 : (x == z ? 0.5 : 0.0);
    if (mann_whitney_u(a, b).u_a == brute) ++matches;
  }
  return {matches == 200, fmt("%d/200 instances match pair enumeration", matches)};
}

Outcome sex_specific_construction() {
  SyntheticSpec fs = cohort_spec(40, 0.3, 909);
  fs.space = "euclidean";
  const SyntheticCohort flat = generate_synthetic(fs);
  const Labels fl = labels(flat);
  const BScoreModel fm = fit_bscore_model(flat.points, fl.sexes, fl.kl);
  double flat_dir = 0.0;
  for (Sex s : {Sex::female, Sex::male})
    flat_dir = std::max(flat_dir, test::max_abs_diff(fm.branch(s).geodesic.direction().coords(),
                                                     fm.oa_geodesic.direction().coords()));

  const SyntheticCohort curved = generate_synthetic(cohort_spec(40, 0.3, 910));
  const Labels cl = labels(curved);
  const BScoreModel cm = fit_bscore_model(curved.points, cl.sexes, cl.kl);
  double unit_err = 0.0, through = 0.0;
  for (Sex s : {Sex::female, Sex::male}) {
    const SexBranch& br = cm.branch(s);
    unit_err = std::max(unit_err, std::abs(norm(br.nonoa_mean, br.geodesic.direction()) - 1.0));
    through = std::max(through, distance(br.geodesic.evaluate(0.0), br.nonoa_mean));
  }
  return {flat_dir < kParallelTol && unit_err < kUnitTol && through < kUnitTol,
          fmt("flat direction diff %.3g, curved |norm - 1| %.3g, d(gamma(0), mean) %.3g",
              flat_dir, unit_err, through)};
}

// Order statistic by linear interpolation between closest ranks.
double oracle_percentile(const std::vector<double>& sorted, double p) {
  const double pos = p / 100.0 * double(sorted.size() - 1);
  double whole = 0.0;
  const double frac = std::modf(pos, &whole);
  const auto k = std::size_t(whole);
  if (k + 1 >= sorted.size()) return sorted.back();
  return sorted[k] * (1.0 - frac) + sorted[k + 1] * frac;
}

Outcome percentile_trimming() {
  Rng rng(1010);
  std::vector<double> s(1000);
  for (double& v : s) v = rng.uniform(-3.0, 7.0);
  std::vector<double> sorted = s;
  std::sort(sorted.begin(), sorted.end());
  const double lo = oracle_percentile(sorted, 0.75), hi = oracle_percentile(sorted, 99.25);
  const auto expected = std::count_if(s.begin(), s.end(), [&](double v) { return v >= lo && v <= hi; });
  const std::size_t kept = trim_percentiles(s, 0.75, 99.25).size();
  return {kept == std::size_t(expected), fmt("kept %zu, oracle %ld", kept, long(expected))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"projection convergence", projection_convergence},
      {"flat-space consistency", flat_consistency},
      {"calibration identity", calibration_identity},
      {"rigid-motion invariance", rigid_invariance},
      {"ground-truth recovery", ground_truth_recovery},
      {"manifold oracles", manifold_oracles},
      {"risk model", risk_model},
      {"Mann-Whitney exactness", mann_whitney_exactness},
      {"sex-specific geodesics", sex_specific_construction},
      {"percentile trimming", percentile_trimming},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
