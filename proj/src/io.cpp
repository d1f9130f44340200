#include "gbs/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gbs/error.hpp"

namespace gbs {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "archive I/O assumes a little-endian host");

constexpr char kArchiveMagic[8] = {'G', 'B', 'S', 'A', 'R', 'C', 'H', '1'};

json coords(std::span<const double> c) { return json(std::vector<double>(c.begin(), c.end())); }

std::vector<double> coords_from(const json& j, const char* what) {
  if (!j.is_array())
    throw Error(ErrorCode::ParseError, std::string(what) + " must be an array");
  return j.get<std::vector<double>>();
}

json geodesic_to_json(const Geodesic& g) {
  return {{"base", coords(g.base().coords())},
          {"direction", coords(g.direction().coords())},
          {"length", g.length()}};
}

Geodesic geodesic_from_json(const json& j, const ManifoldLayout& layout) {
  return Geodesic(ShapePoint(layout, coords_from(j.at("base"), "geodesic base")),
                  TangentVector(layout, coords_from(j.at("direction"), "geodesic direction")),
                  j.at("length").get<double>());
}

}  // namespace

json layout_to_json(const ManifoldLayout& layout) {
  const auto w = layout.block_weights();
  return {{"rotation_count", layout.rotation_count()},
          {"spd_count", layout.spd_count()},
          {"euclidean_dim", layout.euclidean_dim()},
          {"block_weights", std::vector<double>(w.begin(), w.end())}};
}

ManifoldLayout layout_from_json(const json& j) {
  return ManifoldLayout(j.at("rotation_count").get<std::size_t>(),
                        j.at("spd_count").get<std::size_t>(),
                        j.at("euclidean_dim").get<std::size_t>(),
                        j.at("block_weights").get<std::vector<double>>());
}

json model_to_json(const BScoreModel& model) {
  json sexes = json::object();
  for (Sex sex : {Sex::female, Sex::male}) {
    const auto& b = sex == Sex::female ? model.female : model.male;
    if (!b) continue;
    sexes[std::string(to_string(sex))] = {
        {"nonoa_mean", coords(b->nonoa_mean.coords())},
        {"geodesic", geodesic_to_json(b->geodesic)},
        {"lambda", b->lambda},
        {"nonoa_count", b->nonoa_count},
        {"oa_count", b->oa_count},
    };
  }
  return {
      {"format", "gbscore-model"},
      {"version", kModelFormatVersion},
      {"layout", layout_to_json(model.layout())},
      {"mixed_nonoa_mean", coords(model.mixed_nonoa_mean.coords())},
      {"oa_mean", coords(model.oa_mean.coords())},
      {"oa_geodesic", geodesic_to_json(model.oa_geodesic)},
      {"sexes", sexes},
      {"provenance",
       {{"space", model.provenance.space},
        {"reference_sha256", model.provenance.reference_hash},
        {"nonoa_count", model.provenance.nonoa_count},
        {"oa_count", model.provenance.oa_count}}},
  };
}

BScoreModel model_from_json(const json& j) {
  try {
    if (j.at("format") != "gbscore-model")
      throw Error(ErrorCode::ParseError, "not a gbscore model document");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw Error(ErrorCode::ParseError,
                  "unsupported model version " + j.at("version").dump());
    const ManifoldLayout layout = layout_from_json(j.at("layout"));
    BScoreModel m;
    m.mixed_nonoa_mean = ShapePoint(layout, coords_from(j.at("mixed_nonoa_mean"), "mixed_nonoa_mean"));
    m.oa_mean = ShapePoint(layout, coords_from(j.at("oa_mean"), "oa_mean"));
    m.oa_geodesic = geodesic_from_json(j.at("oa_geodesic"), layout);
    for (const auto& [name, b] : j.at("sexes").items()) {
      SexBranch branch;
      branch.nonoa_mean = ShapePoint(layout, coords_from(b.at("nonoa_mean"), "nonoa_mean"));
      branch.geodesic = geodesic_from_json(b.at("geodesic"), layout);
      branch.lambda = b.at("lambda").get<double>();
      branch.nonoa_count = b.at("nonoa_count").get<std::size_t>();
      branch.oa_count = b.at("oa_count").get<std::size_t>();
      if (!(branch.lambda > 0.0))
        throw Error(ErrorCode::ParseError, "lambda must be positive");
      (parse_sex(name) == Sex::female ? m.female : m.male) = std::move(branch);
    }
    const json& p = j.at("provenance");
    m.provenance.space = p.at("space").get<std::string>();
    m.provenance.reference_hash = p.at("reference_sha256").get<std::string>();
    m.provenance.nonoa_count = p.at("nonoa_count").get<std::size_t>();
    m.provenance.oa_count = p.at("oa_count").get<std::size_t>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model document: ") + e.what());
  }
}

void write_model(const std::filesystem::path& path, const BScoreModel& model) {
  write_text_file(path, model_to_json(model).dump(2) + "\n");
}

BScoreModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

void write_archive(const std::filesystem::path& path, const ShapeArchive& archive) {
  if (archive.ids.size() != archive.points.size())
    throw Error(ErrorCode::InvalidArgument, "archive ids and points differ in count");
  for (const auto& p : archive.points)
    if (!(p.layout() == archive.layout))
      throw Error(ErrorCode::LayoutMismatch, "archive point has a foreign layout");

  const json header = {
      {"format", "gbscore-archive"},
      {"version", kArchiveFormatVersion},
      {"space", archive.space},
      {"reference_sha256", archive.reference_hash},
      {"layout", layout_to_json(archive.layout)},
      {"ids", archive.ids},
  };
  const std::string text = header.dump();
  std::string bytes(kArchiveMagic, sizeof(kArchiveMagic));
  const std::uint64_t len = text.size();
  bytes.append(reinterpret_cast<const char*>(&len), sizeof(len));
  bytes += text;
  for (const auto& p : archive.points)
    bytes.append(reinterpret_cast<const char*>(p.coords().data()),
                 p.coords().size() * sizeof(double));
  write_text_file(path, bytes);
}

ShapeArchive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[8];
  std::uint64_t len = 0;
  if (!in.read(magic, 8) || std::memcmp(magic, kArchiveMagic, 8) != 0)
    throw Error(ErrorCode::ParseError, path.string() + ": not a coordinate archive");
  if (!in.read(reinterpret_cast<char*>(&len), sizeof(len)) || len > (1ull << 32))
    throw Error(ErrorCode::ParseError, path.string() + ": truncated header");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len)))
    throw Error(ErrorCode::ParseError, path.string() + ": truncated header");

  ShapeArchive archive;
  try {
    const json header = json::parse(text);
    if (header.at("format") != "gbscore-archive" ||
        header.at("version").get<int>() != kArchiveFormatVersion)
      throw Error(ErrorCode::ParseError, path.string() + ": unsupported archive");
    archive.space = header.at("space").get<std::string>();
    archive.reference_hash = header.at("reference_sha256").get<std::string>();
    archive.layout = layout_from_json(header.at("layout"));
    archive.ids = header.at("ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }

  const std::size_t dim = archive.layout.point_size();
  archive.points.reserve(archive.ids.size());
  for (std::size_t i = 0; i < archive.ids.size(); ++i) {
    std::vector<double> c(dim);
    if (!in.read(reinterpret_cast<char*>(c.data()),
                 static_cast<std::streamsize>(dim * sizeof(double))))
      throw Error(ErrorCode::ParseError,
                  path.string() + ": truncated at point " + std::to_string(i));
    archive.points.emplace_back(archive.layout, std::move(c));
  }
  return archive;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &n);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < n; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace gbs
