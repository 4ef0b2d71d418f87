#include "spmap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "spmap/errors.hpp"
#include "spmap/util.hpp"

namespace spmap {

Aabb bounding_box(const TriangleMesh& mesh) {
  Aabb box;
  for (const Vec3& v : mesh.vertices) box.expand(v);
  return box;
}

Vec3 face_normal_scaled(const TriangleMesh& mesh, std::size_t f) {
  Vec3 a = mesh.face_vertex(f, 0);
  Vec3 b = mesh.face_vertex(f, 1);
  Vec3 c = mesh.face_vertex(f, 2);
  return cross(b - a, c - a);
}

double face_area(const TriangleMesh& mesh, std::size_t f) {
  return 0.5 * norm(face_normal_scaled(mesh, f));
}

double surface_area(const TriangleMesh& mesh) {
  double s = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) s += face_area(mesh, f);
  return s;
}

double normalize_mesh(TriangleMesh& mesh, double target_extent) {
  if (mesh.vertices.empty()) throw EmptyMesh("normalize_mesh: empty mesh");
  Aabb box = bounding_box(mesh);
  Vec3 c = box.center();
  Vec3 e = box.extent();
  double longest = std::max({e.x, e.y, e.z});
  double scale = longest > 0.0 ? target_extent / longest : 1.0;
  for (Vec3& v : mesh.vertices) v = (v - c) * scale;
  return scale;
}

void require_normalized(const TriangleMesh& mesh, double target_extent,
                        double slack) {
  double h = 0.5 * target_extent + slack;
  for (const Vec3& v : mesh.vertices) {
    if (std::fabs(v.x) > h || std::fabs(v.y) > h || std::fabs(v.z) > h) {
      throw UnnormalizedMesh("vertex outside [-" + format_double(h) + ", " +
                             format_double(h) + "]^3");
    }
  }
}

std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t n,
                                 std::uint64_t seed) {
  std::vector<double> cum(mesh.face_count());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    total += face_area(mesh, f);
    cum[f] = total;
  }
  if (mesh.face_count() == 0 || total <= 0.0) {
    throw EmptyMesh("sample_surface: no positive-area faces");
  }
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pick = uni(rng) * total;
    std::size_t f = static_cast<std::size_t>(
        std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin());
    if (f >= mesh.face_count()) f = mesh.face_count() - 1;
    double r1 = std::sqrt(uni(rng));
    double r2 = uni(rng);
    Vec3 a = mesh.face_vertex(f, 0);
    Vec3 b = mesh.face_vertex(f, 1);
    Vec3 c = mesh.face_vertex(f, 2);
    pts.push_back(a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2));
  }
  return pts;
}

std::size_t drop_degenerate_faces(TriangleMesh& mesh, double min_area) {
  std::size_t kept = 0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    if (face_area(mesh, f) >= min_area) mesh.faces[kept++] = mesh.faces[f];
  }
  std::size_t dropped = mesh.face_count() - kept;
  mesh.faces.resize(kept);
  return dropped;
}

void append_mesh(TriangleMesh& a, const TriangleMesh& b) {
  std::uint32_t off = static_cast<std::uint32_t>(a.vertices.size());
  a.vertices.insert(a.vertices.end(), b.vertices.begin(), b.vertices.end());
  for (const auto& f : b.faces) {
    a.faces.push_back({f[0] + off, f[1] + off, f[2] + off});
  }
}

std::uint64_t mesh_hash(const TriangleMesh& mesh) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  if (!mesh.vertices.empty()) {
    h = fnv1a64(mesh.vertices.data(), mesh.vertices.size() * sizeof(Vec3), h);
  }
  if (!mesh.faces.empty()) {
    h = fnv1a64(mesh.faces.data(),
                mesh.faces.size() * sizeof(mesh.faces[0]), h);
  }
  return h;
}

}  // namespace spmap
