#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gbs {

using Face = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;  // mm
  std::vector<Face> faces;
};

/// Throws InvalidArgument for out-of-range indices and DegenerateFace for
/// faces with area <= 1e-12 mm^2.
void validate(const TriangleMesh& mesh);

double face_area(const TriangleMesh& mesh, std::size_t f);
Eigen::Vector3d centroid(const TriangleMesh& mesh);

struct InnerEdge {
  std::uint32_t face_i;  // face_i < face_j
  std::uint32_t face_j;
  std::array<std::uint32_t, 2> vertices;  // ascending
};

struct MeshTopology {
  std::vector<Face> faces;
  /// Sorted lexicographically by vertex pair.
  std::vector<InnerEdge> inner_edges;

  std::size_t face_count() const { return faces.size(); }
  std::size_t inner_edge_count() const { return inner_edges.size(); }
};

/// Throws NonManifoldEdge for an edge shared by more than two faces and
/// BoundaryOnlyMesh when no edge is shared.
MeshTopology build_topology(const TriangleMesh& mesh);

/// Reflects the vertices through the plane with the given normal passing
/// through the vertex centroid, and reverses every face so the mesh stays
/// consistently oriented.
TriangleMesh mirror(const TriangleMesh& mesh, const Eigen::Vector3d& normal);

/// Applies x -> rotation * x + translation.
TriangleMesh transformed(const TriangleMesh& mesh,
                         const Eigen::Matrix3d& rotation,
                         const Eigen::Vector3d& translation);

// ASCII mesh files. Only vertex positions and triangular faces are read;
// everything else is skipped. Polygons with more than three corners are
// rejected.
TriangleMesh read_mesh(const std::filesystem::path& path);
TriangleMesh read_off(std::istream& in, const std::string& name = "<stream>");
TriangleMesh read_obj(std::istream& in, const std::string& name = "<stream>");
TriangleMesh read_ply(std::istream& in, const std::string& name = "<stream>");

void write_off(std::ostream& out, const TriangleMesh& mesh);
void write_off(const std::filesystem::path& path, const TriangleMesh& mesh);

}  // namespace gbs
