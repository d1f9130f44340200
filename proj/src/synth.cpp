#include "gbs/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "gbs/bscore.hpp"
#include "gbs/error.hpp"
#include "gbs/io.hpp"
#include "gbs/rng.hpp"

namespace gbs {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidSpec, what);
}

// Normal draw per tangent coordinate, scaled so the expected squared metric
// norm is `rms`^2.
TangentVector random_tangent(const ManifoldLayout& layout, double rms, Rng& rng) {
  const auto w = layout.tangent_weights();
  const double per = rms / std::sqrt(static_cast<double>(w.size()));
  std::vector<double> c(w.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = per * rng.normal() / std::sqrt(w[k]);
  return TangentVector(layout, std::move(c));
}

TangentVector orthogonalized(const ShapePoint& p, TangentVector v, const TangentVector& unit) {
  v -= metric(p, v, unit) * unit;
  return v;
}

TangentVector unit(const ShapePoint& p, TangentVector v) {
  const double n = norm(p, v);
  require(n > 0.0, "cannot normalize a zero tangent");
  v *= 1.0 / n;
  return v;
}

struct Draw {
  Sex sex;
  int kl;
  double t;
};

// Raw scores per sex, standardized so that the sex's non-OA scores have
// mean 0 and population std 1/lambda; OA scores share the same affine map.
std::vector<Draw> draw_scores(const SyntheticSpec& spec, Rng& rng) {
  std::vector<Draw> out;
  for (int s = 0; s < 2; ++s) {
    const Sex sex = s == 0 ? Sex::female : Sex::male;
    const std::size_t n0 = spec.nonoa[s], n1 = spec.oa[s];
    if (n0 + n1 == 0) continue;
    std::vector<Draw> group;
    for (std::size_t i = 0; i < n0; ++i) {
      const int kl = 3 * i < 2 * n0 ? 0 : 1;
      group.push_back({sex, kl, rng.normal(spec.kl_t_means[kl], spec.t_sd)});
    }
    for (std::size_t i = 0; i < n1; ++i) {
      const int kl = 2 + static_cast<int>(i % 3);
      group.push_back({sex, kl, rng.normal(spec.kl_t_means[kl], spec.t_sd)});
    }
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n0; ++i) mean += group[i].t;
    mean /= static_cast<double>(n0);
    for (std::size_t i = 0; i < n0; ++i) sq += (group[i].t - mean) * (group[i].t - mean);
    const double sd = std::sqrt(sq / static_cast<double>(n0));
    require(sd > 0.0, "non-OA scores have zero spread");
    for (auto& d : group) d.t = (d.t - mean) / sd / spec.lambda;
    out.insert(out.end(), group.begin(), group.end());
  }
  return out;
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

// Smooth displacement fields on the normalized ellipsoid coordinates.
Eigen::Vector3d oa_field(const Eigen::Vector3d& u) {
  return {0.8 * u.x() * u.z(), -0.5 * u.y() + 0.3 * u.x() * u.y(), u.z() * u.z() - 0.3};
}

Eigen::Vector3d sex_field(const Eigen::Vector3d& u) {
  return {1.5 * u.x(), 0.5 * u.y(), 0.0};
}

constexpr int kNoiseFields = 18;

Eigen::Vector3d noise_field(int k, const Eigen::Vector3d& u) {
  const double m[6] = {u.x() * u.x(), u.y() * u.y(), u.z() * u.z(),
                       u.x() * u.y(), u.y() * u.z(), u.z() * u.x()};
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  v[k % 3] = m[k / 3];
  return v;
}

std::string subject_id(std::size_t i, std::size_t n) {
  std::string digits = std::to_string(i + 1);
  const std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());
  return "S" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

void SyntheticSpec::validate() const {
  require(mode == "archive" || mode == "mesh", "mode must be archive or mesh");
  require(space == "fcm" || space == "euclidean", "space must be fcm or euclidean");
  require(subdivisions >= 0 && subdivisions <= 5, "subdivisions must be in [0, 5]");
  for (double r : radii) require(r > 0.0, "radii must be positive");
  for (int s = 0; s < 2; ++s) {
    if (nonoa[s] + oa[s] == 0) continue;
    require(nonoa[s] >= 2, "every present sex needs at least 2 non-OA subjects");
  }
  require(oa[0] + oa[1] >= 1, "at least one OA subject is required");
  require(t_sd > 0.0 && lambda > 0.0, "t_sd and lambda must be positive");
  require(noise >= 0.0 && sex_offset >= 0.0 && mean_spread >= 0.0,
          "noise, sex_offset and mean_spread must be non-negative");
  require(right_fraction >= 0.0 && right_fraction <= 1.0,
          "right_fraction must be in [0, 1]");
  require(std::isfinite(beta0) && std::isfinite(beta1), "beta must be finite");
}

TriangleMesh ellipsoid_mesh(int subdivisions, const std::array<double, 3>& radii) {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {
      {-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
      {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                         {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                         {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                         {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& p : v) p.normalize();
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto idx = static_cast<std::uint32_t>(v.size() - 1);
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    for (const Face& t : f) {
      const std::uint32_t a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]),
                          c = midpoint(t[2], t[0]);
      next.insert(next.end(), {Face{t[0], a, c}, Face{t[1], b, a}, Face{t[2], c, b},
                               Face{a, b, c}});
    }
    f = std::move(next);
  }
  for (auto& p : v) p = Eigen::Vector3d(radii[0] * p.x(), radii[1] * p.y(), radii[2] * p.z());
  return {std::move(v), std::move(f)};
}

SyntheticCohort generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticCohort out;
  out.spec = spec;
  out.reference = ellipsoid_mesh(spec.subdivisions, spec.radii);

  const std::vector<Draw> draws = draw_scores(spec, rng);
  const std::size_t n = draws.size();

  if (spec.mode == "archive") {
    ShapePoint origin;
    if (spec.space == "fcm") {
      FcmEncoder encoder(out.reference, spec.weighting);
      out.layout = encoder.layout();
      origin = encoder.encode(out.reference);
    } else {
      origin = stack_vertices(out.reference);
      out.layout = origin.layout();
    }
    const ShapePoint mean = exp(origin, random_tangent(out.layout, spec.mean_spread, rng));
    const TangentVector w = unit(mean, random_tangent(out.layout, 1.0, rng));
    TangentVector offset =
        orthogonalized(mean, random_tangent(out.layout, 1.0, rng), w);
    offset = spec.sex_offset * unit(mean, std::move(offset));
    out.sex_means[0] = exp(mean, offset);
    out.sex_means[1] = exp(mean, -1.0 * offset);
    const std::array<TangentVector, 2> ws = {
        parallel_transport(w, mean, *out.sex_means[0]),
        parallel_transport(w, mean, *out.sex_means[1])};
    out.common_mean = mean;
    out.direction = w;

    for (const Draw& d : draws) {
      const int s = d.sex == Sex::female ? 0 : 1;
      const ShapePoint& m = *out.sex_means[s];
      TangentVector v = orthogonalized(m, random_tangent(out.layout, spec.noise, rng), ws[s]);
      v += d.t * ws[s];
      out.points.push_back(exp(m, v));
    }
  } else {
    const Eigen::Vector3d scale(spec.radii[0], spec.radii[1], spec.radii[2]);
    for (const Draw& d : draws) {
      const double sex_sign = d.sex == Sex::female ? 1.0 : -1.0;
      std::array<double, kNoiseFields> z;
      for (double& c : z) c = rng.normal() * spec.noise / std::sqrt(double(kNoiseFields));
      TriangleMesh mesh = out.reference;
      for (auto& x : mesh.vertices) {
        const Eigen::Vector3d u = x.cwiseQuotient(scale);
        Eigen::Vector3d dx = d.t * oa_field(u) + sex_sign * spec.sex_offset * sex_field(u);
        for (int k = 0; k < kNoiseFields; ++k) dx += z[k] * noise_field(k, u);
        x += dx;
      }
      out.meshes.push_back(std::move(mesh));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    SubjectRecord r;
    r.id = subject_id(i, n);
    r.sex = draws[i].sex;
    r.kl_grade = draws[i].kl;
    const double eta = spec.beta0 + spec.beta1 * spec.lambda * draws[i].t;
    r.tkr_within_8y = rng.bernoulli(1.0 / (1.0 + std::exp(-eta)));
    if (spec.mode == "mesh") {
      const bool right = rng.uniform() < spec.right_fraction;
      const Eigen::Matrix3d rot = random_rotation(rng);
      const Eigen::Vector3d shift(rng.normal(0, 50), rng.normal(0, 50), rng.normal(0, 50));
      TriangleMesh& mesh = out.meshes[i];
      if (right) {
        mesh = mirror(mesh, Eigen::Vector3d::UnitX());
        r.laterality = Laterality::right;
      }
      mesh = transformed(mesh, rot, shift);
      r.mesh_path = "meshes/" + r.id + ".off";
    }
    out.records.push_back(std::move(r));
    out.t.push_back(draws[i].t);
  }
  return out;
}

void write_synthetic(const SyntheticCohort& cohort, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_off(dir / "reference.off", cohort.reference);

  std::ostringstream csv;
  write_cohort(csv, cohort.records);
  write_text_file(dir / "cohort.csv", csv.str());

  const SyntheticSpec& spec = cohort.spec;
  if (spec.mode == "archive") {
    ShapeArchive archive;
    archive.space = spec.space;
    archive.reference_hash = sha256_file(dir / "reference.off");
    archive.layout = cohort.layout;
    for (const auto& r : cohort.records) archive.ids.push_back(r.id);
    archive.points = cohort.points;
    write_archive(dir / "archive.gbsa", archive);
  } else {
    for (std::size_t i = 0; i < cohort.meshes.size(); ++i)
      write_off(dir / cohort.records[i].mesh_path, cohort.meshes[i]);
  }

  nlohmann::json subjects = nlohmann::json::array();
  for (std::size_t i = 0; i < cohort.records.size(); ++i) {
    const auto& r = cohort.records[i];
    subjects.push_back({{"id", r.id},
                        {"sex", to_string(r.sex)},
                        {"kl", r.kl_grade},
                        {"t", cohort.t[i]},
                        {"b_score", spec.lambda * cohort.t[i]},
                        {"tkr8y", *r.tkr_within_8y}});
  }
  nlohmann::json truth = {
      {"seed", spec.seed},
      {"mode", spec.mode},
      {"space", spec.space},
      {"lambda", spec.lambda},
      {"beta0", spec.beta0},
      {"beta1", spec.beta1},
      {"noise", spec.noise},
      {"subjects", subjects},
  };
  if (cohort.direction) {
    const auto c = cohort.direction->coords();
    truth["direction"] = std::vector<double>(c.begin(), c.end());
    const auto m = cohort.common_mean->coords();
    truth["common_mean"] = std::vector<double>(m.begin(), m.end());
  }
  write_text_file(dir / "truth.json", truth.dump(2) + "\n");
}

}  // namespace gbs
