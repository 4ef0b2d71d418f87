#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "spmap/vec.hpp"

namespace spmap {

struct Aabb {
  Vec3 lo{1e30, 1e30, 1e30};
  Vec3 hi{-1e30, -1e30, -1e30};

  void expand(const Vec3& p) { lo = min(lo, p); hi = max(hi, p); }
  void expand(const Aabb& b) { lo = min(lo, b.lo); hi = max(hi, b.hi); }
  Vec3 center() const { return (lo + hi) * 0.5; }
  Vec3 extent() const { return hi - lo; }
  bool empty() const { return lo.x > hi.x; }
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }

  Vec3 face_vertex(std::size_t f, int corner) const {
    return vertices[faces[f][corner]];
  }
};

Aabb bounding_box(const TriangleMesh& mesh);

// Area-weighted face normal (length = 2 * area).
Vec3 face_normal_scaled(const TriangleMesh& mesh, std::size_t f);
double face_area(const TriangleMesh& mesh, std::size_t f);
double surface_area(const TriangleMesh& mesh);

// Translates the bounding-box center to the origin and scales uniformly so
// the longest bounding-box side becomes `target_extent` (mesh spans
// [-target_extent/2, target_extent/2] on that axis). Degenerate boxes
// (zero extent) only translate. Returns the applied scale. Throws EmptyMesh
// when there are no vertices to normalize.
double normalize_mesh(TriangleMesh& mesh, double target_extent = 1.0);

// Throws UnnormalizedMesh unless every vertex lies in [-h, h]^3,
// h = target_extent/2 + slack.
void require_normalized(const TriangleMesh& mesh, double target_extent = 1.0,
                        double slack = 1e-9);

// n points sampled uniformly by area; faces chosen by cumulative-area
// inversion, barycentric coordinates by sqrt trick. Deterministic in seed.
// Throws EmptyMesh if the mesh has no faces with positive area.
std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t n,
                                 std::uint64_t seed);

// Removes faces whose area is < min_area (degenerate slivers and repeated
// indices). Returns the number of faces dropped.
std::size_t drop_degenerate_faces(TriangleMesh& mesh, double min_area = 1e-12);

// Concatenates b into a (vertex indices of b shifted).
void append_mesh(TriangleMesh& a, const TriangleMesh& b);

// Content hash over vertex and face bytes; stable across platforms of the
// same endianness (files store little-endian, this sandbox is LE).
std::uint64_t mesh_hash(const TriangleMesh& mesh);

}  // namespace spmap
