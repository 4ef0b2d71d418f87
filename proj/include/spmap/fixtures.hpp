#pragma once

#include <string>
#include <vector>

#include "spmap/mesh.hpp"

namespace spmap {

// Procedural test meshes, all generated in a generation frame roughly inside
// [-0.5, 0.5]^3; callers normalize before encoding.  Closed fixtures are
// watertight 2-manifolds (possibly multiple components, e.g. the cup handle).

TriangleMesh fx_box(double dx, double dy, double dz);
TriangleMesh fx_icosphere(double radius, int subdivisions);

// Benchmark corpus members.
TriangleMesh fx_sphere();   // icosphere r=0.4
TriangleMesh fx_shells();   // concentric spheres r=0.4 and r=0.2 (flipped)
TriangleMesh fx_torus(double ring_radius = 0.25, double tube_radius = 0.12,
                      int n_ring = 64, int n_tube = 32);
TriangleMesh fx_boxhole();  // box with a square tunnel along z, genus 1
TriangleMesh fx_cup();      // vessel of revolution + floating torus handle
TriangleMesh fx_dome(int rings = 16, int segments = 32);  // open hemisphere

// Extra fixtures used by tests.
TriangleMesh fx_halfball(int rings = 16, int segments = 32);  // closed
TriangleMesh fx_asym();  // scalene ellipsoid + offset ball, no symmetries
TriangleMesh fx_perf();  // 100k-triangle torus

// Reverses every face, flipping orientation.
TriangleMesh flip_faces(TriangleMesh mesh);

struct FixtureSpec {
  const char* id;
  bool watertight;
  TriangleMesh (*make)();
};

// The six-mesh benchmark corpus (sphere, shells, torus, boxhole, cup, dome).
const std::vector<FixtureSpec>& fixture_corpus();

// Any fixture by id, including the test-only extras (asym, halfball, box,
// perf). Throws ParseError on unknown ids.
TriangleMesh make_fixture(const std::string& id);
std::vector<std::string> fixture_ids();

}  // namespace spmap
