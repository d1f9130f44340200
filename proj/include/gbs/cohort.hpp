#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gbs/bscore.hpp"

namespace gbs {

enum class Laterality { left, right };

std::string_view to_string(Laterality side);

struct SubjectRecord {
  std::string id;
  Sex sex = Sex::female;
  int kl_grade = 0;
  /// Empty when the outcome is unknown ("", "NA").
  std::optional<bool> tkr_within_8y;
  Laterality laterality = Laterality::left;
  std::string mesh_path;

  /// Right knees are mirrored onto the left before encoding.
  bool needs_mirroring() const { return laterality == Laterality::right; }
};

/// Splits one CSV line; double quotes protect commas, "" is a literal
/// quote. Fields are trimmed.
std::vector<std::string> split_csv_line(const std::string& line);
/// Quotes a field when it contains a comma, quote or newline.
std::string csv_quote(const std::string& field);

/// Cohort CSV with header `id,sex,kl,tkr8y,laterality,mesh_path`.
/// Throws ParseError (with line number), DuplicateId or InvalidKL.
std::vector<SubjectRecord> load_cohort(const std::filesystem::path& path);
std::vector<SubjectRecord> parse_cohort(std::istream& in,
                                        const std::string& name = "<stream>");
void write_cohort(std::ostream& out, std::span<const SubjectRecord> records);

struct OaSplit {
  std::vector<std::string> nonoa;  // KL <= 1
  std::vector<std::string> oa;     // KL >= 2
};

OaSplit split_by_oa(std::span<const SubjectRecord> records);

struct LogisticOptions {
  double tol = 1e-8;  // on the gradient norm of the log-likelihood
  int max_iter = 100;
};

/// P(outcome | score) = 1 / (1 + exp(-(beta0 + beta1 * score))).
struct LogisticModel {
  double beta0 = 0.0;
  double beta1 = 0.0;
  /// Standard errors from the inverse Fisher information at the optimum.
  double se_beta0 = 0.0;
  double se_beta1 = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  /// Log-likelihood after each accepted step, starting at beta = 0.
  std::vector<double> log_likelihood_trace;
};

/// Maximum-likelihood fit by iteratively reweighted least squares with
/// step halving. Throws SeparableData (one class only, or the classes are
/// separated by a threshold on the score, or |beta| > 1e4) and
/// NotConverged.
LogisticModel fit_logistic(std::span<const double> scores,
                           const std::vector<bool>& outcomes,
                           const LogisticOptions& options = {});

double predict_risk(const LogisticModel& model, double score);

struct MannWhitneyResult {
  double u_a = 0.0;  // pairs with a > b, ties count one half
  double u_b = 0.0;
  double p_value = 1.0;  // two-sided, normal approximation
};

/// Rank-sum U with midranks for ties; p from the normal approximation with
/// tie-corrected variance and continuity correction. Throws
/// InsufficientData when either sample has fewer than 2 values.
MannWhitneyResult mann_whitney_u(std::span<const double> a,
                                 std::span<const double> b);

struct KlHistogram {
  std::vector<double> bin_edges;
  /// Mass per bin for each represented grade. Every subject weighs
  /// 1 / (|its grade| * number of grades), so each grade contributes the
  /// same total mass and all bins sum to 1. Scores outside the edges are
  /// counted in the first or last bin.
  std::map<int, std::vector<double>> per_grade;
};

/// Throws EmptyBinEdges (fewer than 2 edges), InvalidArgument (edges not
/// increasing, length mismatch).
KlHistogram kl_normalized_distribution(std::span<const double> scores,
                                       std::span<const int> kl_grades,
                                       std::span<const double> bin_edges);

struct RiskSummary {
  double median = 0.0;
  double mean = 0.0;
  double p5 = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  double p95 = 0.0;
};

/// Order statistics by linear interpolation. Throws EmptyInput.
RiskSummary risk_summary(std::span<const double> risks);

}  // namespace gbs
