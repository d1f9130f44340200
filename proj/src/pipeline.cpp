#include "gbs/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <toml.hpp>

#include "gbs/bscore.hpp"
#include "gbs/error.hpp"
#include "gbs/io.hpp"
#include "gbs/parallel.hpp"

namespace gbs {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json j = json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (const auto* a = node.as_array()) {
    json j = json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  throw Error(ErrorCode::InvalidSpec, "unsupported TOML value type");
}

template <typename T>
T get(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidSpec, "config key '" + key + "' has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

void apply_solver(PipelineConfig& c, const json& j) {
  for (const auto& [k, v] : j.items()) {
    if (k == "frechet_tol") c.frechet.tol = get<double>(v, k);
    else if (k == "frechet_max_iter") c.frechet.max_iter = get<int>(v, k);
    else if (k == "projection_tol") c.projection.tol = get<double>(v, k);
    else if (k == "projection_max_iter") c.projection.max_iter = get<int>(v, k);
    else if (k == "procrustes_tol") c.procrustes.tol = get<double>(v, k);
    else if (k == "procrustes_max_iter") c.procrustes.max_iter = get<int>(v, k);
    else if (k == "logistic_tol") c.logistic.tol = get<double>(v, k);
    else if (k == "logistic_max_iter") c.logistic.max_iter = get<int>(v, k);
    else throw Error(ErrorCode::InvalidSpec, "unknown config key 'solver." + k + "'");
  }
}

BlockWeighting parse_weighting(const std::string& s) {
  if (s == "uniform") return BlockWeighting::uniform;
  if (s == "area") return BlockWeighting::area;
  throw Error(ErrorCode::InvalidSpec, "block_weighting must be uniform or area");
}

void apply_synth(SyntheticSpec& s, const json& j) {
  for (const auto& [k, v] : j.items()) {
    if (k == "mode") s.mode = get<std::string>(v, k);
    else if (k == "space") s.space = get<std::string>(v, k);
    else if (k == "subdivisions") s.subdivisions = get<int>(v, k);
    else if (k == "radii") s.radii = get<std::array<double, 3>>(v, k);
    else if (k == "block_weighting") s.weighting = parse_weighting(get<std::string>(v, k));
    else if (k == "female_nonoa") s.nonoa[0] = get<std::size_t>(v, k);
    else if (k == "male_nonoa") s.nonoa[1] = get<std::size_t>(v, k);
    else if (k == "female_oa") s.oa[0] = get<std::size_t>(v, k);
    else if (k == "male_oa") s.oa[1] = get<std::size_t>(v, k);
    else if (k == "kl_t_means") s.kl_t_means = get<std::array<double, 5>>(v, k);
    else if (k == "t_sd") s.t_sd = get<double>(v, k);
    else if (k == "lambda") s.lambda = get<double>(v, k);
    else if (k == "sex_offset") s.sex_offset = get<double>(v, k);
    else if (k == "noise") s.noise = get<double>(v, k);
    else if (k == "mean_spread") s.mean_spread = get<double>(v, k);
    else if (k == "beta0") s.beta0 = get<double>(v, k);
    else if (k == "beta1") s.beta1 = get<double>(v, k);
    else if (k == "right_fraction") s.right_fraction = get<double>(v, k);
    else throw Error(ErrorCode::InvalidSpec, "unknown config key 'synth." + k + "'");
  }
}

struct Failure {
  std::string id;
  ErrorCode code;
  std::string message;
};

std::string failures_csv(std::vector<Failure> failures) {
  std::sort(failures.begin(), failures.end(),
            [](const Failure& a, const Failure& b) { return a.id < b.id; });
  std::string out = "id,error,message\n";
  for (const auto& f : failures)
    out += csv_quote(f.id) + ',' + std::string(to_string(f.code)) + ',' +
           csv_quote(f.message) + '\n';
  return out;
}

// Runs fn(i) for every index, turning exceptions into per-item failures.
template <typename Fn>
std::vector<std::optional<Failure>> guarded(std::size_t n, int workers,
                                            const std::vector<SubjectRecord>& records,
                                            Fn fn) {
  std::vector<std::optional<Failure>> failures(n);
  parallel_for(n, workers, [&](std::size_t i) {
    try {
      fn(i);
    } catch (const Error& e) {
      failures[i] = Failure{records[i].id, e.code(), e.what()};
    } catch (const std::exception& e) {
      failures[i] = Failure{records[i].id, ErrorCode::IoError, e.what()};
    }
  });
  return failures;
}

std::vector<SubjectRecord> sorted_cohort(const fs::path& path) {
  std::vector<SubjectRecord> records = load_cohort(path);
  std::sort(records.begin(), records.end(),
            [](const SubjectRecord& a, const SubjectRecord& b) { return a.id < b.id; });
  return records;
}

std::map<std::string, const SubjectRecord*> index_by_id(const std::vector<SubjectRecord>& r) {
  std::map<std::string, const SubjectRecord*> out;
  for (const auto& s : r) out.emplace(s.id, &s);
  return out;
}

const SubjectRecord& lookup(const std::map<std::string, const SubjectRecord*>& index,
                            const std::string& id) {
  auto it = index.find(id);
  if (it == index.end())
    throw Error(ErrorCode::InvalidArgument, "subject '" + id + "' is not in the cohort");
  return *it->second;
}

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw Error(ErrorCode::InvalidSpec, what + " is not configured");
  if (!fs::exists(p)) throw Error(ErrorCode::IoError, what + " not found: " + p.string());
}

struct ScoreRow {
  std::string id;
  Sex sex;
  int kl;
  double t;
  double b_score;
  bool kept;
};

std::vector<ScoreRow> read_scores(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "id,sex,kl,t,b_score,kept")
    throw Error(ErrorCode::ParseError, path.string() + ": unexpected header");
  std::vector<ScoreRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    try {
      if (f.size() != 6) throw std::invalid_argument("field count");
      rows.push_back({f[0], parse_sex(f[1]), std::stoi(f[2]), std::stod(f[3]),
                      std::stod(f[4]), f[5] == "1"});
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  return rows;
}

json summary_json(const RiskSummary& s, std::size_t n) {
  return {{"n", n},        {"median", s.median}, {"mean", s.mean}, {"p5", s.p5},
          {"p25", s.p25}, {"p75", s.p75},       {"p95", s.p95}};
}

std::string svg_header(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
         "\" height=\"" + std::to_string(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"};

std::string histogram_svg(const KlHistogram& h) {
  const int W = 640, H = 360, L = 50, R = 110, T = 20, B = 40;
  double ymax = 0.0;
  for (const auto& [kl, mass] : h.per_grade)
    for (double m : mass) ymax = std::max(ymax, m);
  if (ymax <= 0.0) ymax = 1.0;
  const double x0 = h.bin_edges.front(), x1 = h.bin_edges.back();
  auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto Y = [&](double y) { return H - B - y / ymax * (H - T - B); };
  std::string s = svg_header(W, H);
  s += "<line x1=\"" + num(L) + "\" y1=\"" + num(H - B) + "\" x2=\"" + num(W - R) +
       "\" y2=\"" + num(H - B) + "\" stroke=\"black\"/>\n";
  int c = 0;
  for (const auto& [kl, mass] : h.per_grade) {
    const char* color = kPalette[c % 5];
    std::string pts;
    for (std::size_t b = 0; b < mass.size(); ++b) {
      pts += num(X(h.bin_edges[b])) + "," + num(Y(mass[b])) + " ";
      pts += num(X(h.bin_edges[b + 1])) + "," + num(Y(mass[b])) + " ";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"" + pts + "\"/>\n";
    s += "<text x=\"" + num(W - R + 10) + "\" y=\"" + num(T + 16 * c + 10) + "\" fill=\"" +
         color + "\">KL " + std::to_string(kl) + "</text>\n";
    ++c;
  }
  s += "<text x=\"" + num(L) + "\" y=\"" + num(H - 10) + "\">" + num(x0) + "</text>\n";
  s += "<text x=\"" + num(W - R) + "\" y=\"" + num(H - 10) +
       "\" text-anchor=\"end\">" + num(x1) + "</text>\n";
  s += "<text x=\"" + num((L + W - R) / 2.0) + "\" y=\"" + num(H - 10) +
       "\" text-anchor=\"middle\">B-score</text>\n</svg>\n";
  return s;
}

std::string boxplot_svg(const std::vector<std::pair<std::string, RiskSummary>>& groups) {
  const int W = 360, H = 360, L = 50, T = 20, B = 40;
  auto Y = [&](double y) { return H - B - y * (H - T - B); };
  std::string s = svg_header(W, H);
  s += "<line x1=\"" + num(L) + "\" y1=\"" + num(Y(0)) + "\" x2=\"" + num(L) + "\" y2=\"" +
       num(Y(1)) + "\" stroke=\"black\"/>\n";
  for (double tick : {0.0, 0.5, 1.0})
    s += "<text x=\"" + num(L - 6) + "\" y=\"" + num(Y(tick) + 4) +
         "\" text-anchor=\"end\">" + num(tick) + "</text>\n";
  const double slot = double(W - L) / double(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& [name, r] = groups[g];
    const double cx = L + slot * (g + 0.5), hw = slot * 0.25;
    const std::string color = kPalette[g % 5];
    s += "<line x1=\"" + num(cx) + "\" y1=\"" + num(Y(r.p5)) + "\" x2=\"" + num(cx) +
         "\" y2=\"" + num(Y(r.p95)) + "\" stroke=\"" + color + "\"/>\n";
    s += "<rect x=\"" + num(cx - hw) + "\" y=\"" + num(Y(r.p75)) + "\" width=\"" +
         num(2 * hw) + "\" height=\"" + num(Y(r.p25) - Y(r.p75)) +
         "\" fill=\"white\" stroke=\"" + color + "\"/>\n";
    s += "<line x1=\"" + num(cx - hw) + "\" y1=\"" + num(Y(r.median)) + "\" x2=\"" +
         num(cx + hw) + "\" y2=\"" + num(Y(r.median)) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(cx) + "\" y=\"" + num(H - 10) + "\" text-anchor=\"middle\">" +
         name + "</text>\n";
  }
  return s + "</svg>\n";
}

}  // namespace

void PipelineConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::InvalidSpec, what);
  };
  require(space == "fcm" || space == "euclidean", "space must be fcm or euclidean");
  require(trim_lo >= 0.0 && trim_lo < trim_hi && trim_hi <= 100.0,
          "trim needs 0 <= trim_lo < trim_hi <= 100");
  require(frechet.tol > 0 && projection.tol > 0 && procrustes.tol > 0 && logistic.tol > 0,
          "tolerances must be positive");
  require(frechet.max_iter > 0 && projection.max_iter > 0 && procrustes.max_iter > 0 &&
              logistic.max_iter > 0,
          "iteration limits must be positive");
  require(workers >= 1, "workers must be at least 1");
  require(histogram_bins >= 1, "histogram_bins must be at least 1");
  require(mirror_normal.norm() > 0.0, "mirror_normal must be non-zero");
}

void apply_config(PipelineConfig& c, const json& j, const fs::path& base) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "config must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "reference_mesh") c.reference_mesh = resolve(base, get<std::string>(v, k));
    else if (k == "cohort_csv") c.cohort_csv = resolve(base, get<std::string>(v, k));
    else if (k == "output_dir") c.output_dir = resolve(base, get<std::string>(v, k));
    else if (k == "space") c.space = get<std::string>(v, k);
    else if (k == "trim_lo") c.trim_lo = get<double>(v, k);
    else if (k == "trim_hi") c.trim_hi = get<double>(v, k);
    else if (k == "block_weighting") c.block_weighting = parse_weighting(get<std::string>(v, k));
    else if (k == "mirror_normal") {
      const auto n = get<std::array<double, 3>>(v, k);
      c.mirror_normal = Eigen::Vector3d(n[0], n[1], n[2]).normalized();
    } else if (k == "seed") c.seed = get<std::uint64_t>(v, k);
    else if (k == "workers") c.workers = get<int>(v, k);
    else if (k == "histogram_bins") c.histogram_bins = get<int>(v, k);
    else if (k == "svg") c.svg = get<bool>(v, k);
    else if (k == "solver") apply_solver(c, v);
    else if (k == "synth") apply_synth(c.synth, v);
    else throw Error(ErrorCode::InvalidSpec, "unknown config key '" + k + "'");
  }
}

PipelineConfig load_config(const fs::path& path) {
  json j;
  if (path.extension() == ".toml") {
    try {
      j = toml_to_json(toml::parse_file(path.string()));
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << path.string() << ":" << e.source().begin.line << ": " << e.description();
      throw Error(ErrorCode::ParseError, msg.str());
    }
  } else {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
  }
  PipelineConfig c;
  apply_config(c, j, path.parent_path());
  c.validate();
  return c;
}

TriangleMesh to_left(const TriangleMesh& mesh, const TriangleMesh& reference,
                     const Eigen::Vector3d& normal) {
  TriangleMesh out = mirror(mesh, normal);
  if (out.faces.size() != reference.faces.size() || out.faces == reference.faces) return out;
  auto rotations_of = [](const Face& a, const Face& b) {
    return a == b || a == Face{b[1], b[2], b[0]} || a == Face{b[2], b[0], b[1]};
  };
  for (std::size_t f = 0; f < out.faces.size(); ++f)
    if (!rotations_of(out.faces[f], reference.faces[f])) return out;
  out.faces = reference.faces;
  return out;
}

StageReport cmd_synth(const PipelineConfig& config) {
  config.validate();
  SyntheticSpec spec = config.synth;
  spec.seed = config.seed;
  const SyntheticCohort cohort = generate_synthetic(spec);
  write_synthetic(cohort, config.output_dir);
  return {cohort.records.size(), 0, {}};
}

StageReport cmd_encode(const PipelineConfig& config) {
  config.validate();
  require_file(config.reference_mesh, "reference mesh");
  require_file(config.cohort_csv, "cohort CSV");
  const std::vector<SubjectRecord> records = sorted_cohort(config.cohort_csv);
  const fs::path mesh_dir = config.cohort_csv.parent_path();
  const TriangleMesh reference = read_mesh(config.reference_mesh);
  const std::size_t n = records.size();

  auto load = [&](std::size_t i) {
    const auto& r = records[i];
    if (r.mesh_path.empty())
      throw Error(ErrorCode::InvalidArgument, "subject has no mesh_path");
    TriangleMesh m = read_mesh(resolve(mesh_dir, r.mesh_path));
    return r.needs_mirroring() ? to_left(m, reference, config.mirror_normal) : m;
  };

  ShapeArchive archive;
  archive.space = config.space;
  archive.reference_hash = sha256_file(config.reference_mesh);
  std::vector<std::optional<Failure>> failures;

  if (config.space == "fcm") {
    const FcmEncoder encoder(reference, config.block_weighting);
    archive.layout = encoder.layout();
    std::vector<std::optional<ShapePoint>> points(n);
    failures = guarded(n, config.workers, records,
                       [&](std::size_t i) { points[i] = encoder.encode(load(i)); });
    for (std::size_t i = 0; i < n; ++i)
      if (points[i]) {
        archive.ids.push_back(records[i].id);
        archive.points.push_back(std::move(*points[i]));
      }
  } else {
    std::vector<std::optional<TriangleMesh>> meshes(n);
    failures = guarded(n, config.workers, records, [&](std::size_t i) {
      TriangleMesh m = load(i);
      validate(m);
      if (m.vertices.size() != reference.vertices.size() || m.faces != reference.faces)
        throw Error(ErrorCode::TopologyMismatch, "mesh topology differs from the reference");
      meshes[i] = std::move(m);
    });
    std::vector<TriangleMesh> ok;
    for (std::size_t i = 0; i < n; ++i)
      if (meshes[i]) {
        archive.ids.push_back(records[i].id);
        ok.push_back(std::move(*meshes[i]));
      }
    if (!ok.empty()) {
      const std::vector<TriangleMesh> aligned = procrustes_align(ok, config.procrustes);
      archive.layout = ManifoldLayout::euclidean(3 * reference.vertices.size());
      for (const auto& m : aligned) {
        const ShapePoint p = stack_vertices(m);
        archive.points.emplace_back(archive.layout,
                                    std::vector<double>(p.coords().begin(), p.coords().end()));
      }
    }
  }

  std::vector<Failure> failed;
  for (auto& f : failures)
    if (f) failed.push_back(std::move(*f));
  write_archive(config.output_dir / "archive.gbsa", archive);
  write_text_file(config.output_dir / "encode_failures.csv", failures_csv(failed));
  return {archive.ids.size(), failed.size(), {}};
}

StageReport cmd_fit(const PipelineConfig& config) {
  config.validate();
  require_file(config.cohort_csv, "cohort CSV");
  const ShapeArchive archive = read_archive(config.output_dir / "archive.gbsa");
  const std::vector<SubjectRecord> records = sorted_cohort(config.cohort_csv);
  const auto index = index_by_id(records);

  std::vector<Sex> sexes;
  std::vector<int> kl;
  for (const auto& id : archive.ids) {
    const SubjectRecord& r = lookup(index, id);
    sexes.push_back(r.sex);
    kl.push_back(r.kl_grade);
  }
  FitOptions opts{config.frechet, config.projection};
  opts.frechet.workers = opts.projection.workers = config.workers;
  BScoreModel model = fit_bscore_model(archive.points, sexes, kl, opts);
  model.provenance.space = archive.space;
  model.provenance.reference_hash = archive.reference_hash;
  write_model(config.output_dir / "model.json", model);
  return {archive.ids.size(), 0, {}};
}

StageReport cmd_score(const PipelineConfig& config) {
  config.validate();
  require_file(config.cohort_csv, "cohort CSV");
  const BScoreModel model = read_model(config.output_dir / "model.json");
  const ShapeArchive archive = read_archive(config.output_dir / "archive.gbsa");
  if (!(archive.layout == model.layout()))
    throw Error(ErrorCode::LayoutMismatch, "archive and model layouts differ");
  if (archive.reference_hash != model.provenance.reference_hash)
    throw Error(ErrorCode::InvalidArgument, "archive and model come from different references");
  const std::vector<SubjectRecord> all = sorted_cohort(config.cohort_csv);
  const auto index = index_by_id(all);

  std::vector<SubjectRecord> records;
  for (const auto& id : archive.ids) records.push_back(lookup(index, id));
  const std::size_t n = records.size();
  std::vector<ScoredSubject> scored(n);
  SolverOptions opts = config.projection;
  opts.workers = 1;
  auto failures = guarded(n, config.workers, records, [&](std::size_t i) {
    scored[i] = geodesic_bscore(model, archive.points[i], records[i].sex, opts);
  });

  std::vector<std::size_t> ok;
  std::vector<double> b;
  std::vector<Failure> failed;
  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) {
      failed.push_back(std::move(*failures[i]));
    } else {
      ok.push_back(i);
      b.push_back(scored[i].b_score);
    }
  }
  std::vector<bool> kept(n, false);
  if (!b.empty())
    for (std::size_t k : trim_percentiles(b, config.trim_lo, config.trim_hi)) kept[ok[k]] = true;

  std::string out = "id,sex,kl,t,b_score,kept\n";
  for (std::size_t i : ok)
    out += csv_quote(records[i].id) + ',' + std::string(to_string(records[i].sex)) + ',' +
           std::to_string(records[i].kl_grade) + ',' + num(scored[i].t) + ',' +
           num(scored[i].b_score) + ',' + (kept[i] ? "1" : "0") + '\n';
  write_text_file(config.output_dir / "scores.csv", out);
  write_text_file(config.output_dir / "score_failures.csv", failures_csv(failed));
  return {ok.size(), failed.size(), {}};
}

StageReport cmd_risk(const PipelineConfig& config) {
  config.validate();
  require_file(config.cohort_csv, "cohort CSV");
  const std::vector<ScoreRow> rows = read_scores(config.output_dir / "scores.csv");
  const std::vector<SubjectRecord> records = sorted_cohort(config.cohort_csv);
  const auto index = index_by_id(records);

  std::vector<const ScoreRow*> kept;
  for (const auto& r : rows)
    if (r.kept) kept.push_back(&r);
  if (kept.empty()) throw Error(ErrorCode::EmptyInput, "no kept scores");

  // KL-normalized score distribution over all kept rows.
  std::vector<double> all_b;
  std::vector<int> all_kl;
  for (const auto* r : kept) {
    all_b.push_back(r->b_score);
    all_kl.push_back(r->kl);
  }
  auto [lo_it, hi_it] = std::minmax_element(all_b.begin(), all_b.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi <= lo) hi = lo + 1.0;
  std::vector<double> edges(config.histogram_bins + 1);
  for (int k = 0; k <= config.histogram_bins; ++k)
    edges[k] = lo + (hi - lo) * k / config.histogram_bins;
  edges.back() = hi;
  const KlHistogram hist = kl_normalized_distribution(all_b, all_kl, edges);
  {
    std::string csv = "bin_lo,bin_hi";
    for (const auto& [g, m] : hist.per_grade) csv += ",kl" + std::to_string(g);
    csv += '\n';
    for (int k = 0; k < config.histogram_bins; ++k) {
      csv += num(edges[k]) + ',' + num(edges[k + 1]);
      for (const auto& [g, m] : hist.per_grade) csv += ',' + num(m[k]);
      csv += '\n';
    }
    write_text_file(config.output_dir / "kl_histogram.csv", csv);
    if (config.svg) write_text_file(config.output_dir / "kl_histogram.svg", histogram_svg(hist));
  }

  std::vector<const ScoreRow*> with_outcome;
  std::vector<double> b;
  std::vector<bool> y;
  for (const auto* r : kept) {
    const auto& outcome = lookup(index, r->id).tkr_within_8y;
    if (!outcome) continue;
    with_outcome.push_back(r);
    b.push_back(r->b_score);
    y.push_back(*outcome);
  }
  if (with_outcome.empty())
    return {0, 0, "no TKR outcomes in the cohort; risk model skipped"};

  const LogisticModel model = fit_logistic(b, y, config.logistic);
  std::vector<double> risk_tkr, risk_non;
  std::string subjects = "id,t,b_score,tkr8y,risk\n";
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double p = predict_risk(model, b[i]);
    (y[i] ? risk_tkr : risk_non).push_back(p);
    subjects += csv_quote(with_outcome[i]->id) + ',' + num(with_outcome[i]->t) + ',' +
                num(b[i]) + ',' + (y[i] ? "1" : "0") + ',' + num(p) + '\n';
  }
  write_text_file(config.output_dir / "risk_subjects.csv", subjects);

  json groups = json::object();
  std::vector<std::pair<std::string, RiskSummary>> boxes;
  for (auto [name, risks] : {std::pair{"non_tkr", &risk_non}, std::pair{"tkr", &risk_tkr}}) {
    if (risks->empty()) continue;
    const RiskSummary s = risk_summary(*risks);
    groups[name] = summary_json(s, risks->size());
    boxes.emplace_back(name, s);
  }
  std::string box = "group,n,p5,p25,median,p75,p95,mean\n";
  for (const auto& [name, s] : boxes)
    box += name + ',' + std::to_string(groups[name]["n"].get<std::size_t>()) + ',' +
           num(s.p5) + ',' + num(s.p25) + ',' + num(s.median) + ',' + num(s.p75) + ',' +
           num(s.p95) + ',' + num(s.mean) + '\n';
  write_text_file(config.output_dir / "risk_boxplot.csv", box);
  if (config.svg) write_text_file(config.output_dir / "risk_boxplot.svg", boxplot_svg(boxes));

  json summary = {
      {"n", b.size()},
      {"logistic",
       {{"beta0", model.beta0},
        {"beta1", model.beta1},
        {"se_beta0", model.se_beta0},
        {"se_beta1", model.se_beta1},
        {"log_likelihood", model.log_likelihood},
        {"iterations", model.iterations}}},
      {"groups", groups},
  };
  if (risk_tkr.size() >= 2 && risk_non.size() >= 2) {
    const MannWhitneyResult mw = mann_whitney_u(risk_tkr, risk_non);
    summary["mann_whitney"] = {{"u_tkr", mw.u_a}, {"u_non_tkr", mw.u_b}, {"p_value", mw.p_value}};
  }
  write_text_file(config.output_dir / "risk_summary.json", summary.dump(2) + "\n");
  return {b.size(), 0, {}};
}

}  // namespace gbs
