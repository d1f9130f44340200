#pragma once

// Persistent artifacts: the fitted model (versioned JSON) and the
// coordinate archive written by `encode` / `synth`.
//
// Archive layout (little-endian):
//   8 bytes   magic "GBSARCH1"
//   u64       header length H
//   H bytes   JSON header {format, version, space, reference_sha256,
//             layout, ids}
//   f64[]     coordinates, one point after another in header id order

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "gbs/bscore.hpp"

namespace gbs {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kArchiveFormatVersion = 1;

nlohmann::json layout_to_json(const ManifoldLayout& layout);
ManifoldLayout layout_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const BScoreModel& model);
BScoreModel model_from_json(const nlohmann::json& j);
void write_model(const std::filesystem::path& path, const BScoreModel& model);
BScoreModel read_model(const std::filesystem::path& path);

struct ShapeArchive {
  std::string space;  // "fcm" or "euclidean"
  std::string reference_hash;
  ManifoldLayout layout;
  std::vector<std::string> ids;
  std::vector<ShapePoint> points;
};

void write_archive(const std::filesystem::path& path, const ShapeArchive& archive);
ShapeArchive read_archive(const std::filesystem::path& path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Writes `content` to `path` atomically (temporary file + rename).
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace gbs
