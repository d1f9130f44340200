#include "gbs/mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "gbs/error.hpp"

namespace gbs {
namespace {

[[noreturn]] void parse_error(const std::string& name, std::size_t line,
                              const std::string& what) {
  throw Error(ErrorCode::ParseError,
              name + ":" + std::to_string(line) + ": " + what);
}

// Reads non-empty, non-comment lines while tracking line numbers.
class LineReader {
 public:
  LineReader(std::istream& in, std::string name, char comment)
      : in_(in), name_(std::move(name)), comment_(comment) {}

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto pos = line.find_first_not_of(" \t");
      if (pos == std::string::npos) continue;
      if (comment_ && line[pos] == comment_) continue;
      return true;
    }
    return false;
  }

  std::string require(const char* what) {
    std::string line;
    if (!next(line)) fail(std::string("unexpected end of file, expected ") + what);
    return line;
  }

  [[noreturn]] void fail(const std::string& what) const {
    parse_error(name_, number_, what);
  }

 private:
  std::istream& in_;
  std::string name_;
  char comment_;
  std::size_t number_ = 0;
};

Eigen::Vector3d parse_vertex(std::istringstream& ss, const LineReader& reader) {
  Eigen::Vector3d v;
  if (!(ss >> v.x() >> v.y() >> v.z())) reader.fail("malformed vertex");
  return v;
}

std::uint32_t checked_index(long long idx, std::size_t vertex_count,
                            const LineReader& reader) {
  if (idx < 0 || static_cast<std::size_t>(idx) >= vertex_count)
    reader.fail("face index " + std::to_string(idx) + " out of range");
  return static_cast<std::uint32_t>(idx);
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

double face_area(const TriangleMesh& mesh, std::size_t f) {
  const Face& t = mesh.faces[f];
  const Eigen::Vector3d e1 = mesh.vertices[t[1]] - mesh.vertices[t[0]];
  const Eigen::Vector3d e2 = mesh.vertices[t[2]] - mesh.vertices[t[0]];
  return 0.5 * e1.cross(e2).norm();
}

Eigen::Vector3d centroid(const TriangleMesh& mesh) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& v : mesh.vertices) c += v;
  return mesh.vertices.empty() ? c : c / static_cast<double>(mesh.vertices.size());
}

void validate(const TriangleMesh& mesh) {
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (auto idx : mesh.faces[f])
      if (idx >= mesh.vertices.size())
        throw Error(ErrorCode::InvalidArgument,
                    "face " + std::to_string(f) + " references vertex " +
                        std::to_string(idx) + " of " +
                        std::to_string(mesh.vertices.size()));
    if (!(face_area(mesh, f) > 1e-12))
      throw Error(ErrorCode::DegenerateFace,
                  "face " + std::to_string(f) + " has zero area");
  }
}

MeshTopology build_topology(const TriangleMesh& mesh) {
  validate(mesh);
  std::map<std::array<std::uint32_t, 2>, std::vector<std::uint32_t>> edges;
  for (std::uint32_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& t = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = t[k];
      const std::uint32_t b = t[(k + 1) % 3];
      edges[{std::min(a, b), std::max(a, b)}].push_back(f);
    }
  }

  MeshTopology topo;
  topo.faces = mesh.faces;
  for (const auto& [verts, faces] : edges) {
    if (faces.size() > 2)
      throw Error(ErrorCode::NonManifoldEdge,
                  "edge (" + std::to_string(verts[0]) + ", " +
                      std::to_string(verts[1]) + ") borders " +
                      std::to_string(faces.size()) + " faces");
    if (faces.size() == 2)
      topo.inner_edges.push_back({std::min(faces[0], faces[1]),
                                  std::max(faces[0], faces[1]), verts});
  }
  if (topo.inner_edges.empty())
    throw Error(ErrorCode::BoundaryOnlyMesh, "mesh has no inner edges");
  return topo;
}

TriangleMesh mirror(const TriangleMesh& mesh, const Eigen::Vector3d& normal) {
  const Eigen::Vector3d n = normal.normalized();
  const Eigen::Vector3d c = centroid(mesh);
  TriangleMesh out;
  out.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices)
    out.vertices.push_back(v - 2.0 * (v - c).dot(n) * n);
  out.faces.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces) out.faces.push_back({f[0], f[2], f[1]});
  return out;
}

TriangleMesh transformed(const TriangleMesh& mesh,
                         const Eigen::Matrix3d& rotation,
                         const Eigen::Vector3d& translation) {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = rotation * v + translation;
  return out;
}

// --- readers ----------------------------------------------------------------

TriangleMesh read_off(std::istream& in, const std::string& name) {
  LineReader reader(in, name, '#');
  std::string line = reader.require("OFF header");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") reader.fail("missing OFF magic");
  long long nv = -1, nf = -1;
  if (!(header >> nv >> nf)) {
    std::istringstream counts(reader.require("vertex/face counts"));
    if (!(counts >> nv >> nf)) reader.fail("malformed counts");
  }
  if (nv < 0 || nf < 0) reader.fail("negative counts");

  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    std::istringstream ss(reader.require("vertex"));
    mesh.vertices.push_back(parse_vertex(ss, reader));
  }
  mesh.faces.reserve(static_cast<std::size_t>(nf));
  for (long long i = 0; i < nf; ++i) {
    std::istringstream ss(reader.require("face"));
    long long k = 0, a = 0, b = 0, c = 0;
    if (!(ss >> k)) reader.fail("malformed face");
    if (k != 3) reader.fail("only triangular faces are supported");
    if (!(ss >> a >> b >> c)) reader.fail("malformed face");
    mesh.faces.push_back({checked_index(a, mesh.vertices.size(), reader),
                          checked_index(b, mesh.vertices.size(), reader),
                          checked_index(c, mesh.vertices.size(), reader)});
  }
  return mesh;
}

TriangleMesh read_obj(std::istream& in, const std::string& name) {
  LineReader reader(in, name, '#');
  TriangleMesh mesh;
  constexpr auto kUnbounded = std::numeric_limits<std::uint32_t>::max();
  std::string line;
  while (reader.next(line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      mesh.vertices.push_back(parse_vertex(ss, reader));
    } else if (tag == "f") {
      std::string token;
      std::vector<std::uint32_t> corners;
      while (ss >> token) {
        long long c = 0;
        try {
          c = std::stoll(token.substr(0, token.find('/')));
        } catch (const std::exception&) {
          reader.fail("malformed face index '" + token + "'");
        }
        if (c == 0) reader.fail("OBJ indices are 1-based");
        // negative indices count back from the latest vertex
        const long long idx =
            c > 0 ? c - 1 : static_cast<long long>(mesh.vertices.size()) + c;
        corners.push_back(checked_index(idx, kUnbounded, reader));
      }
      if (corners.size() != 3) reader.fail("only triangular faces are supported");
      mesh.faces.push_back({corners[0], corners[1], corners[2]});
    }
  }
  for (const auto& f : mesh.faces)
    for (auto idx : f)
      if (idx >= mesh.vertices.size())
        parse_error(name, 0, "face index " + std::to_string(idx + 1) + " out of range");
  return mesh;
}

TriangleMesh read_ply(std::istream& in, const std::string& name) {
  LineReader reader(in, name, 0);
  if (reader.require("ply magic").rfind("ply", 0) != 0) reader.fail("missing ply magic");

  struct Property {
    std::string name;
    bool is_list = false;
  };
  struct Element {
    std::string name;
    long long count = 0;
    std::vector<Property> properties;
  };
  std::vector<Element> elements;
  for (;;) {
    std::istringstream ss(reader.require("ply header"));
    std::string tag;
    ss >> tag;
    if (tag == "end_header") break;
    if (tag == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "ascii") reader.fail("only ASCII PLY is supported");
    } else if (tag == "element") {
      Element e;
      if (!(ss >> e.name >> e.count)) reader.fail("malformed element");
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) reader.fail("property before element");
      Property p;
      std::string type;
      ss >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ss >> count_type >> item_type;
        p.is_list = true;
      }
      ss >> p.name;
      elements.back().properties.push_back(p);
    }
    // comment / obj_info lines are ignored
  }

  TriangleMesh mesh;
  constexpr auto kUnbounded = std::numeric_limits<std::uint32_t>::max();
  for (const Element& e : elements) {
    for (long long row = 0; row < e.count; ++row) {
      std::istringstream ss(reader.require(e.name.c_str()));
      if (e.name == "vertex") {
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        for (const Property& p : e.properties) {
          if (p.is_list) {
            long long k = 0;
            ss >> k;
            for (double skip; k > 0 && ss >> skip; --k) {}
            continue;
          }
          double value = 0.0;
          if (!(ss >> value)) reader.fail("malformed vertex");
          if (p.name == "x") v.x() = value;
          else if (p.name == "y") v.y() = value;
          else if (p.name == "z") v.z() = value;
        }
        mesh.vertices.push_back(v);
      } else if (e.name == "face") {
        bool seen = false;
        for (const Property& p : e.properties) {
          if (!p.is_list) {
            double skip;
            ss >> skip;
            continue;
          }
          long long k = 0;
          if (!(ss >> k)) reader.fail("malformed face");
          if (!seen && (p.name == "vertex_indices" || p.name == "vertex_index")) {
            if (k != 3) reader.fail("only triangular faces are supported");
            long long a, b, c;
            if (!(ss >> a >> b >> c)) reader.fail("malformed face");
            mesh.faces.push_back({checked_index(a, kUnbounded, reader),
                                  checked_index(b, kUnbounded, reader),
                                  checked_index(c, kUnbounded, reader)});
            seen = true;
          } else {
            for (double skip; k > 0 && ss >> skip; --k) {}
          }
        }
        if (!seen) reader.fail("face element without vertex_indices");
      }
    }
  }
  for (const auto& f : mesh.faces)
    for (auto idx : f)
      if (idx >= mesh.vertices.size())
        parse_error(name, 0, "face index " + std::to_string(idx) + " out of range");
  return mesh;
}

TriangleMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".off") return read_off(in, path.string());
  if (ext == ".obj") return read_obj(in, path.string());
  if (ext == ".ply") return read_ply(in, path.string());
  throw Error(ErrorCode::ParseError,
              "unsupported mesh format '" + ext + "' for " + path.string());
}

void write_off(std::ostream& out, const TriangleMesh& mesh) {
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& v : mesh.vertices)
    out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces)
    out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void write_off(const std::filesystem::path& path, const TriangleMesh& mesh) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_off(out, mesh);
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

}  // namespace gbs
