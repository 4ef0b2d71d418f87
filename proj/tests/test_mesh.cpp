#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "spmap/fixtures.hpp"
#include "spmap/mesh.hpp"
#include "spmap/mesh_io.hpp"

using namespace spmap;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("mesh") {

TEST_CASE("normalize_mesh maps known boxes to the unit frame") {
  TriangleMesh cube = fx_box(2, 2, 2);
  for (auto& v : cube.vertices) v += Vec3{1, 1, 1};  // corners (0,0,0)-(2,2,2)
  normalize_mesh(cube);
  Aabb box = bounding_box(cube);
  CHECK(norm(box.lo - Vec3{-0.5, -0.5, -0.5}) < 1e-12);
  CHECK(norm(box.hi - Vec3{0.5, 0.5, 0.5}) < 1e-12);

  TriangleMesh b = fx_box(4, 2, 1);
  normalize_mesh(b);
  Aabb bb = bounding_box(b);
  CHECK(norm(bb.extent() - Vec3{1.0, 0.5, 0.25}) < 1e-12);
  CHECK(norm(bb.center()) < 1e-12);
}

TEST_CASE("normalize_mesh is idempotent") {
  TriangleMesh m = fx_box(4, 2, 1);
  for (auto& v : m.vertices) v += Vec3{0.3, -0.1, 2.0};
  normalize_mesh(m);
  TriangleMesh again = m;
  normalize_mesh(again);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) {
    CHECK(norm(m.vertices[i] - again.vertices[i]) < 1e-12);
  }
}

TEST_CASE("normalized meshes fit the radius-sqrt(3)/2 sphere") {
  for (const std::string& id : fixture_ids()) {
    TriangleMesh m = make_fixture(id);
    normalize_mesh(m);
    double worst = 0.0;
    for (const Vec3& v : m.vertices) worst = std::max(worst, norm(v));
    CHECK(worst <= std::sqrt(3.0) / 2.0 + 1e-9);
  }
}

TEST_CASE("normalize_mesh rejects empty meshes") {
  TriangleMesh empty;
  CHECK_THROWS_AS(normalize_mesh(empty), EmptyMesh);
}

TEST_CASE("obj round-trip preserves topology and geometry") {
  TriangleMesh ico = fx_icosphere(0.4, 3);
  CHECK(ico.face_count() == 1280);
  std::string path = tmp_path("spmap_test_ico.obj");
  save_mesh(path, ico);
  TriangleMesh back = load_mesh(path);
  REQUIRE(back.face_count() == ico.face_count());
  REQUIRE(back.vertex_count() == ico.vertex_count());
  for (std::size_t i = 0; i < ico.vertices.size(); ++i) {
    CHECK(norm(ico.vertices[i] - back.vertices[i]) < 1e-6);
  }
  for (std::size_t f = 0; f < ico.faces.size(); ++f) {
    CHECK(ico.faces[f] == back.faces[f]);
  }
  std::remove(path.c_str());
}

TEST_CASE("ply round-trip preserves topology") {
  TriangleMesh ico = fx_icosphere(0.4, 2);
  std::string path = tmp_path("spmap_test_ico.ply");
  save_mesh(path, ico);
  TriangleMesh back = load_mesh(path);
  REQUIRE(back.face_count() == ico.face_count());
  for (std::size_t i = 0; i < ico.vertices.size(); ++i) {
    CHECK(norm(ico.vertices[i] - back.vertices[i]) < 1e-6);
  }
  std::remove(path.c_str());
}

TEST_CASE("single-triangle obj loads") {
  std::string path = tmp_path("spmap_test_tri.obj");
  {
    std::ofstream out(path);
    out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
  }
  TriangleMesh m = load_mesh(path);
  CHECK(m.face_count() == 1);
  CHECK(m.vertex_count() == 3);
  std::remove(path.c_str());
}

TEST_CASE("polygonal obj faces triangulate by fan") {
  std::string path = tmp_path("spmap_test_quad.obj");
  {
    std::ofstream out(path);
    out << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
  }
  TriangleMesh m = load_mesh(path);
  CHECK(m.face_count() == 2);
  std::remove(path.c_str());
}

TEST_CASE("out-of-range face index is a parse error") {
  std::string path = tmp_path("spmap_test_bad.obj");
  {
    std::ofstream out(path);
    out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 100\n";
  }
  CHECK_THROWS_AS(load_mesh(path), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("missing file and empty mesh raise dedicated errors") {
  CHECK_THROWS_AS(load_mesh(tmp_path("spmap_no_such_file.obj")), FileNotFound);
  std::string path = tmp_path("spmap_test_empty.obj");
  {
    std::ofstream out(path);
    out << "v 0 0 0\nv 1 0 0\nv 0 1 0\n";
  }
  CHECK_THROWS_AS(load_mesh(path), EmptyMesh);
  TriangleMesh empty;
  CHECK_THROWS_AS(save_mesh(tmp_path("spmap_test_e.obj"), empty), EmptyMesh);
  std::remove(path.c_str());
}

TEST_CASE("degenerate faces are dropped at load with a count") {
  std::string path = tmp_path("spmap_test_degen.obj");
  {
    std::ofstream out(path);
    out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 0 0\n";
    out << "f 1 2 3\n";   // fine
    out << "f 1 2 2\n";   // repeated index
    out << "f 1 2 4\n";   // collinear, zero area
  }
  std::size_t dropped = 0;
  TriangleMesh m = load_mesh(path, &dropped);
  CHECK(m.face_count() == 1);
  CHECK(dropped == 2);
  std::remove(path.c_str());
}

TEST_CASE("surface_area and bounding_box agree with analytic shapes") {
  TriangleMesh ico = fx_icosphere(0.4, 4);
  double analytic = 4.0 * kPi * 0.4 * 0.4;
  CHECK(surface_area(ico) == doctest::Approx(analytic).epsilon(0.01));
  Aabb box = bounding_box(ico);
  CHECK(norm(box.hi - Vec3{0.4, 0.4, 0.4}) < 1e-6);
}

TEST_CASE("mesh_hash is stable and input-sensitive") {
  TriangleMesh a = fx_icosphere(0.4, 2);
  TriangleMesh b = fx_icosphere(0.4, 2);
  CHECK(mesh_hash(a) == mesh_hash(b));
  b.vertices[0].x += 1e-6;
  CHECK(mesh_hash(a) != mesh_hash(b));
}

TEST_CASE("sample_surface is deterministic, on-surface, area-weighted") {
  TriangleMesh ico = fx_icosphere(0.4, 2);
  auto p1 = sample_surface(ico, 500, 123);
  auto p2 = sample_surface(ico, 500, 123);
  REQUIRE(p1.size() == 500);
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == p2[i]);
  for (const Vec3& p : p1) CHECK(oracle::point_mesh_dist(ico, p) < 1e-12);

  // Two triangles with area ratio 9:1; the big one should get ~90% of points.
  TriangleMesh two;
  two.vertices = {{0, 0, 0}, {3, 0, 0}, {0, 3, 0}, {10, 0, 0},
                  {11, 0, 0}, {10, 1, 0}};
  two.faces = {{0, 1, 2}, {3, 4, 5}};
  auto pts = sample_surface(two, 4000, 7);
  std::size_t big = 0;
  for (const Vec3& p : pts) {
    if (p.x < 5.0) ++big;
  }
  CHECK(static_cast<double>(big) / pts.size() ==
        doctest::Approx(0.9).epsilon(0.03));
}

}  // TEST_SUITE
