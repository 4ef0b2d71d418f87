#include <algorithm>
#include <cstdint>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "spmap/fixtures.hpp"
#include "spmap/raycast.hpp"
#include "spmap/util.hpp"

using namespace spmap;

namespace {

Vec3 random_dir(std::uint64_t& st) {
  for (;;) {
    st = splitmix64(st);
    double x = (st >> 11) * 0x1p-52 - 1.0;
    st = splitmix64(st);
    double y = (st >> 11) * 0x1p-52 - 1.0;
    st = splitmix64(st);
    double z = (st >> 11) * 0x1p-52 - 1.0;
    Vec3 v{x, y, z};
    double n = norm(v);
    if (n > 1e-3 && n <= 1.0) return v / n;
  }
}

// Triangle whose normal is within `tilt` radians of perpendicular to +x,
// centered on the x-axis at distance 0.4: a ray along +x grazes it.
TriangleMesh grazing_triangle(double tilt) {
  Vec3 n{-std::sin(tilt), 0.0, std::cos(tilt)};
  Vec3 u{std::cos(tilt), 0.0, std::sin(tilt)};
  Vec3 v{0.0, 1.0, 0.0};
  Vec3 c{0.4, 0.0, 0.0};
  TriangleMesh m;
  m.vertices = {c - u * 0.2 - v * 0.2, c + u * 0.4 - v * 0.2, c + v * 0.4};
  m.faces = {{0, 1, 2}};
  (void)n;
  return m;
}

}  // namespace

TEST_SUITE("raycast") {

TEST_CASE("single hits and ordered multi-hits from the origin") {
  TriangleMesh sphere = fx_icosphere(0.4, 4);
  Bvh bvh = build_bvh(sphere);
  HitList hl = intersect_all(bvh, sphere, {{0, 0, 0}, {1, 0, 0}});
  REQUIRE(hl.hits.size() == 1);
  CHECK(hl.hits[0].t == doctest::Approx(0.4).epsilon(2e-3));

  TriangleMesh shells = fx_shells();
  Bvh bvh2 = build_bvh(shells);
  HitList h2 = intersect_all(bvh2, shells, {{0, 0, 0}, {1, 0, 0}});
  REQUIRE(h2.hits.size() == 2);
  CHECK(h2.hits[0].t == doctest::Approx(0.2).epsilon(2e-3));
  CHECK(h2.hits[1].t == doctest::Approx(0.4).epsilon(2e-3));
  CHECK(h2.hits[0].t < h2.hits[1].t);
}

TEST_CASE("bvh structure: single leaf, aabb root, bounded depth") {
  TriangleMesh tri;
  tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  tri.faces = {{0, 1, 2}};
  Bvh one = build_bvh(tri);
  CHECK(one.nodes.size() == 1);
  CHECK(one.nodes[0].leaf());

  TriangleMesh ico = fx_icosphere(0.4, 3);
  Bvh bvh = build_bvh(ico);
  Aabb box = bounding_box(ico);
  CHECK(norm(bvh.nodes[0].box.lo - box.lo) < 1e-9);
  CHECK(norm(bvh.nodes[0].box.hi - box.hi) < 1e-9);

  TriangleMesh big = fx_perf();
  REQUIRE(big.face_count() == 100000);
  Bvh bb = build_bvh(big);
  CHECK(bvh_depth(bb) <= 64);
  // Every face appears exactly once across the leaves.
  std::vector<std::uint32_t> prims = bb.prims;
  std::sort(prims.begin(), prims.end());
  REQUIRE(prims.size() == big.face_count());
  for (std::size_t i = 0; i < prims.size(); ++i) CHECK(prims[i] == i);

  TriangleMesh empty;
  CHECK_THROWS_AS(build_bvh(empty), EmptyMesh);
}

TEST_CASE("accelerated all-hits equals the brute-force oracle") {
  std::uint64_t st = 0xabcdef;
  for (const char* id : {"sphere", "shells", "torus", "boxhole", "halfball"}) {
    TriangleMesh mesh = make_fixture(id);
    Bvh bvh = build_bvh(mesh);
    for (int i = 0; i < 200; ++i) {
      Ray ray{{0, 0, 0}, random_dir(st)};
      HitList fast = intersect_all(bvh, mesh, ray);
      auto brute = oracle::intersect_brute(mesh, ray, kDefaultParallelCos);
      REQUIRE_MESSAGE(fast.hits.size() == brute.size(), id);
      for (std::size_t j = 0; j < brute.size(); ++j) {
        CHECK(std::abs(fast.hits[j].t - brute[j].t) < 1e-7);
        CHECK(fast.hits[j].face_id == brute[j].face_id);
      }
    }
  }
}

TEST_CASE("hit parity matches the winding side of the origin") {
  std::uint64_t st = 77;
  TriangleMesh inside = fx_icosphere(0.4, 3);  // origin inside
  TriangleMesh outside = inside;               // shifted: origin outside
  for (auto& v : outside.vertices) v += Vec3{0.0, 0.0, 0.45};
  Bvh bi = build_bvh(inside), bo = build_bvh(outside);
  for (int i = 0; i < 500; ++i) {
    Vec3 d = random_dir(st);
    CHECK(intersect_all(bi, inside, {{0, 0, 0}, d}).hits.size() % 2 == 1);
    CHECK(intersect_all(bo, outside, {{0, 0, 0}, d}).hits.size() % 2 == 0);
  }
}

TEST_CASE("near-parallel hits are discarded and the retry recovers") {
  TriangleMesh graze = grazing_triangle(5e-5);  // below the 1e-4 threshold
  Bvh bvh = build_bvh(graze);
  Ray ray{{0, 0, 0}, {1, 0, 0}};

  HitList direct = intersect_all(bvh, graze, ray);
  CHECK(direct.hits.empty());
  CHECK(direct.discarded_parallel == 1);

  HitList retry = intersect_all_with_retry(bvh, graze, ray,
                                           kDefaultParallelCos,
                                           kDefaultPerturbSigma, 1234);
  CHECK(retry.retried);
  // Stable nearby hit or clean miss; never a bogus distance.
  if (!retry.hits.empty()) {
    CHECK(retry.hits[0].t == doctest::Approx(0.4).epsilon(1e-3));
  }

  HitList again = intersect_all_with_retry(bvh, graze, ray,
                                           kDefaultParallelCos,
                                           kDefaultPerturbSigma, 1234);
  REQUIRE(again.hits.size() == retry.hits.size());
  for (std::size_t i = 0; i < retry.hits.size(); ++i) {
    CHECK(again.hits[i].t == retry.hits[i].t);  // bit-identical rerun
    CHECK(again.hits[i].face_id == retry.hits[i].face_id);
  }
}

TEST_CASE("retry is a no-op without near-parallel discards") {
  TriangleMesh sphere = fx_icosphere(0.4, 2);
  Bvh bvh = build_bvh(sphere);
  std::uint64_t st = 5;
  for (int i = 0; i < 100; ++i) {
    Ray ray{{0, 0, 0}, random_dir(st)};
    HitList a = intersect_all(bvh, sphere, ray);
    if (a.discarded_parallel > 0) continue;
    HitList b = intersect_all_with_retry(bvh, sphere, ray, kDefaultParallelCos,
                                         kDefaultPerturbSigma, i);
    CHECK_FALSE(b.retried);
    REQUIRE(a.hits.size() == b.hits.size());
    for (std::size_t j = 0; j < a.hits.size(); ++j) {
      CHECK(a.hits[j].t == b.hits[j].t);
    }
  }
}

TEST_CASE("perturb_direction is unit, deterministic, and seed-sensitive") {
  Vec3 d{0, 0, 1};
  Vec3 a = perturb_direction(d, 1e-5, 42);
  Vec3 b = perturb_direction(d, 1e-5, 42);
  Vec3 c = perturb_direction(d, 1e-5, 43);
  CHECK(a == b);
  CHECK(norm(a - c) > 0.0);
  CHECK(std::abs(norm(a) - 1.0) < 1e-12);
  CHECK(norm(a - d) < 1e-3);  // small offset
}

TEST_CASE("hits merge when closer than the merge epsilon") {
  // Two coincident triangles produce one merged hit.
  TriangleMesh m;
  m.vertices = {{0.4, -1, -1}, {0.4, 1, -1}, {0.4, 0, 1},
                {0.4, -1, -1}, {0.4, 1, -1}, {0.4, 0, 1}};
  m.faces = {{0, 1, 2}, {3, 4, 5}};
  Bvh bvh = build_bvh(m);
  HitList hl = intersect_all(bvh, m, {{0, 0, 0}, {1, 0, 0}});
  CHECK(hl.hits.size() == 1);
}

}  // TEST_SUITE
