#pragma once

// The five pipeline stages behind the gbscore CLI. Every stage reads only
// files written by earlier stages (or user inputs) and writes into
// output_dir:
//   synth  -> reference.off, cohort.csv, truth.json, archive.gbsa | meshes/
//   encode -> archive.gbsa, encode_failures.csv
//   fit    -> model.json
//   score  -> scores.csv, score_failures.csv
//   risk   -> risk_summary.json, risk_subjects.csv, kl_histogram.csv,
//             risk_boxplot.csv, [kl_histogram.svg, risk_boxplot.svg]

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <string>

#include "gbs/cohort.hpp"
#include "gbs/fcm.hpp"
#include "gbs/procrustes.hpp"
#include "gbs/statistics.hpp"
#include "gbs/synth.hpp"

namespace gbs {

struct PipelineConfig {
  std::filesystem::path reference_mesh;
  std::filesystem::path cohort_csv;
  std::filesystem::path output_dir = "gbscore-out";
  std::string space = "fcm";  // "fcm" or "euclidean"
  double trim_lo = 0.75;
  double trim_hi = 99.25;
  SolverOptions frechet;
  SolverOptions projection;
  ProcrustesOptions procrustes;
  LogisticOptions logistic;
  BlockWeighting block_weighting = BlockWeighting::uniform;
  Eigen::Vector3d mirror_normal = Eigen::Vector3d::UnitX();
  std::uint64_t seed = 1;
  int workers = 1;
  int histogram_bins = 40;
  bool svg = true;
  SyntheticSpec synth;

  /// Throws InvalidSpec.
  void validate() const;
};

/// Parses a TOML or JSON config (chosen by extension: .toml, else JSON).
/// Relative paths are resolved against the config file's directory.
/// Unknown keys are rejected with InvalidSpec.
PipelineConfig load_config(const std::filesystem::path& path);
/// Applies a JSON object with the config file's keys on top of `config`.
void apply_config(PipelineConfig& config, const nlohmann::json& j,
                  const std::filesystem::path& base_dir);

struct StageReport {
  std::size_t processed = 0;
  std::size_t failed = 0;
  std::string notice;  // e.g. why a stage was skipped
};

StageReport cmd_synth(const PipelineConfig& config);
StageReport cmd_encode(const PipelineConfig& config);
StageReport cmd_fit(const PipelineConfig& config);
StageReport cmd_score(const PipelineConfig& config);
StageReport cmd_risk(const PipelineConfig& config);

/// Brings a right knee onto the left side: mirrors through `normal` and,
/// when the mirrored faces are the reference's triangles in another corner
/// order, adopts the reference's faces.
TriangleMesh to_left(const TriangleMesh& mesh, const TriangleMesh& reference,
                     const Eigen::Vector3d& normal);

}  // namespace gbs
