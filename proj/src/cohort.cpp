#include "gbs/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "gbs/error.hpp"
#include "gbs/statistics.hpp"

namespace gbs {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  for (auto& f : fields) f = trim(f);
  return fields;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

namespace {

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_likelihood(double b0, double b1, std::span<const double> x,
                      const std::vector<bool>& y) {
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double eta = b0 + b1 * x[i];
    ll += (y[i] ? eta : 0.0) - softplus(eta);
  }
  return ll;
}

}  // namespace

std::string_view to_string(Laterality side) {
  return side == Laterality::left ? "left" : "right";
}

std::vector<SubjectRecord> parse_cohort(std::istream& in, const std::string& name) {
  auto fail = [&](ErrorCode code, std::size_t line, const std::string& what) {
    throw Error(code, name + ":" + std::to_string(line) + ": " + what);
  };

  std::string line;
  std::size_t number = 0;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, 1, "missing header");
  ++number;
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);  // UTF-8 BOM
  const std::vector<std::string> expected{"id", "sex", "kl", "tkr8y", "laterality", "mesh_path"};
  if (split_csv_line(line) != expected)
    fail(ErrorCode::ParseError, 1,
         "header must be id,sex,kl,tkr8y,laterality,mesh_path");

  std::vector<SubjectRecord> records;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != expected.size())
      fail(ErrorCode::ParseError, number,
           "expected 6 fields, got " + std::to_string(f.size()));

    SubjectRecord r;
    r.id = f[0];
    if (r.id.empty()) fail(ErrorCode::ParseError, number, "empty id");
    try {
      r.sex = parse_sex(f[1]);
    } catch (const Error&) {
      fail(ErrorCode::UnknownSex, number, "unknown sex '" + f[1] + "'");
    }

    std::size_t used = 0;
    int kl = -1;
    try {
      kl = std::stoi(f[2], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != f[2].size())
      fail(ErrorCode::ParseError, number, "KL grade '" + f[2] + "' is not an integer");
    if (kl < 0 || kl > 4)
      fail(ErrorCode::InvalidKL, number, "KL grade " + f[2] + " outside 0..4");
    r.kl_grade = kl;

    const std::string tkr = lower(f[3]);
    if (tkr == "1" || tkr == "true" || tkr == "yes") r.tkr_within_8y = true;
    else if (tkr == "0" || tkr == "false" || tkr == "no") r.tkr_within_8y = false;
    else if (!(tkr.empty() || tkr == "na"))
      fail(ErrorCode::ParseError, number, "tkr8y '" + f[3] + "' is not a boolean");

    const std::string side = lower(f[4]);
    if (side == "left" || side == "l") r.laterality = Laterality::left;
    else if (side == "right" || side == "r") r.laterality = Laterality::right;
    else fail(ErrorCode::ParseError, number, "unknown laterality '" + f[4] + "'");

    r.mesh_path = f[5];
    if (!ids.insert(r.id).second)
      fail(ErrorCode::DuplicateId, number, "duplicate id '" + r.id + "'");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<SubjectRecord> load_cohort(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_cohort(in, path.string());
}

void write_cohort(std::ostream& out, std::span<const SubjectRecord> records) {
  out << "id,sex,kl,tkr8y,laterality,mesh_path\n";
  for (const auto& r : records) {
    out << csv_quote(r.id) << ',' << to_string(r.sex) << ',' << r.kl_grade << ',';
    if (r.tkr_within_8y) out << (*r.tkr_within_8y ? 1 : 0);
    out << ',' << to_string(r.laterality) << ',' << csv_quote(r.mesh_path) << '\n';
  }
}

OaSplit split_by_oa(std::span<const SubjectRecord> records) {
  OaSplit split;
  for (const auto& r : records) (is_oa(r.kl_grade) ? split.oa : split.nonoa).push_back(r.id);
  return split;
}

LogisticModel fit_logistic(std::span<const double> scores,
                           const std::vector<bool>& outcomes,
                           const LogisticOptions& options) {
  if (scores.size() != outcomes.size())
    throw Error(ErrorCode::InvalidArgument, "scores and outcomes differ in length");
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no observations");

  double max_neg = -INFINITY, min_neg = INFINITY, max_pos = -INFINITY, min_pos = INFINITY;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (outcomes[i]) {
      ++positives;
      max_pos = std::max(max_pos, scores[i]);
      min_pos = std::min(min_pos, scores[i]);
    } else {
      max_neg = std::max(max_neg, scores[i]);
      min_neg = std::min(min_neg, scores[i]);
    }
  }
  if (positives == 0 || positives == scores.size())
    throw Error(ErrorCode::SeparableData, "only one outcome class present");
  if (max_neg <= min_pos || max_pos <= min_neg)
    throw Error(ErrorCode::SeparableData,
                "outcomes are separated by a score threshold");

  LogisticModel model;
  double ll = log_likelihood(0.0, 0.0, scores, outcomes);
  model.log_likelihood_trace.push_back(ll);
  for (;;) {
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double x = scores[i];
      const double p = sigmoid(model.beta0 + model.beta1 * x);
      const double r = (outcomes[i] ? 1.0 : 0.0) - p;
      const double w = p * (1.0 - p);
      g0 += r;
      g1 += r * x;
      h00 += w;
      h01 += w * x;
      h11 += w * x * x;
    }
    const double det = h00 * h11 - h01 * h01;
    if (det > 0.0) {
      model.se_beta0 = std::sqrt(h11 / det);
      model.se_beta1 = std::sqrt(h00 / det);
    }
    if (std::hypot(g0, g1) < options.tol) {
      model.converged = true;
      model.log_likelihood = ll;
      return model;
    }
    if (model.iterations >= options.max_iter || !(det > 0.0))
      throw Error(ErrorCode::NotConverged,
                  "logistic regression: gradient norm " +
                      std::to_string(std::hypot(g0, g1)) + " after " +
                      std::to_string(model.iterations) + " iterations");

    // Newton direction H^-1 g, halved until the likelihood does not drop
    double s0 = (h11 * g0 - h01 * g1) / det;
    double s1 = (h00 * g1 - h01 * g0) / det;
    double next = log_likelihood(model.beta0 + s0, model.beta1 + s1, scores, outcomes);
    for (int halving = 0; next < ll && halving < 50; ++halving) {
      s0 *= 0.5;
      s1 *= 0.5;
      next = log_likelihood(model.beta0 + s0, model.beta1 + s1, scores, outcomes);
    }
    if (next < ll) next = ll, s0 = 0.0, s1 = 0.0;
    model.beta0 += s0;
    model.beta1 += s1;
    ll = next;
    model.log_likelihood_trace.push_back(ll);
    ++model.iterations;
    if (std::hypot(model.beta0, model.beta1) > 1e4)
      throw Error(ErrorCode::SeparableData, "coefficients diverge");
  }
}

double predict_risk(const LogisticModel& model, double score) {
  return sigmoid(model.beta0 + model.beta1 * score);
}

MannWhitneyResult mann_whitney_u(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw Error(ErrorCode::InsufficientData,
                "Mann-Whitney U needs at least 2 values per sample");
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;

  std::vector<std::pair<double, bool>> pooled;  // (value, from a)
  pooled.reserve(n);
  for (double v : a) pooled.emplace_back(v, true);
  for (double v : b) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  double rank_sum_a = 0.0;
  double tie_term = 0.0;  // sum over tie groups of t^3 - t
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (pooled[k].second) rank_sum_a += midrank;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  MannWhitneyResult res;
  const double dna = static_cast<double>(na), dnb = static_cast<double>(nb);
  const double dn = static_cast<double>(n);
  res.u_a = rank_sum_a - dna * (dna + 1.0) / 2.0;
  res.u_b = dna * dnb - res.u_a;

  const double variance =
      dna * dnb / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (!(variance > 0.0)) {
    res.p_value = 1.0;
    return res;
  }
  const double z =
      std::max(0.0, std::abs(res.u_a - dna * dnb / 2.0) - 0.5) / std::sqrt(variance);
  res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

KlHistogram kl_normalized_distribution(std::span<const double> scores,
                                       std::span<const int> kl_grades,
                                       std::span<const double> bin_edges) {
  if (bin_edges.size() < 2)
    throw Error(ErrorCode::EmptyBinEdges, "need at least two bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i)
    if (!(bin_edges[i] > bin_edges[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "bin edges must increase");
  if (scores.size() != kl_grades.size())
    throw Error(ErrorCode::InvalidArgument, "scores and KL grades differ in length");

  std::map<int, std::size_t> group_size;
  for (int kl : kl_grades) ++group_size[kl];

  KlHistogram hist;
  hist.bin_edges.assign(bin_edges.begin(), bin_edges.end());
  const std::size_t bins = bin_edges.size() - 1;
  for (const auto& [kl, count] : group_size) hist.per_grade[kl].assign(bins, 0.0);
  const double grades = static_cast<double>(group_size.size());

  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), scores[i]);
    std::size_t bin = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
        0, std::distance(bin_edges.begin(), it) - 1));
    bin = std::min(bin, bins - 1);
    const double w = 1.0 / (static_cast<double>(group_size[kl_grades[i]]) * grades);
    hist.per_grade[kl_grades[i]][bin] += w;
  }
  return hist;
}

RiskSummary risk_summary(std::span<const double> risks) {
  if (risks.empty()) throw Error(ErrorCode::EmptyInput, "no risks to summarize");
  std::vector<double> sorted(risks.begin(), risks.end());
  std::sort(sorted.begin(), sorted.end());
  RiskSummary s;
  // offsets from the minimum keep the mean of a constant list exact
  double offset = 0.0;
  for (double r : sorted) offset += r - sorted.front();
  s.mean = sorted.front() + offset / static_cast<double>(sorted.size());
  s.median = percentile_sorted(sorted, 50.0);
  s.p5 = percentile_sorted(sorted, 5.0);
  s.p25 = percentile_sorted(sorted, 25.0);
  s.p75 = percentile_sorted(sorted, 75.0);
  s.p95 = percentile_sorted(sorted, 95.0);
  return s;
}

}  // namespace gbs
