#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spmap/mesh.hpp"

namespace spmap {

// Loads .obj (ASCII) or .ply (binary little-endian) by extension.
// Polygons are fan-triangulated; degenerate faces (area < 1e-12) are dropped
// and counted into *dropped when given. Throws FileNotFound / ParseError.
TriangleMesh load_mesh(const std::string& path, std::size_t* dropped = nullptr);

// Saves .obj or .ply by extension. Throws IoError on write failure.
void save_mesh(const std::string& path, const TriangleMesh& mesh);

TriangleMesh load_obj(const std::string& path);
TriangleMesh load_ply(const std::string& path);
void save_obj(const std::string& path, const TriangleMesh& mesh);
void save_ply(const std::string& path, const TriangleMesh& mesh);

// Binary little-endian PLY point cloud; normals optional (must match size).
void save_point_cloud_ply(const std::string& path,
                          const std::vector<Vec3>& points,
                          const std::vector<Vec3>* normals = nullptr);

}  // namespace spmap
