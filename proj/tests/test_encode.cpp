#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "spmap/encode.hpp"
#include "spmap/fixtures.hpp"
#include "spmap/sp_grid.hpp"

using namespace spmap;

TEST_SUITE("encode") {

TEST_CASE("sphere fills exactly one layer at the analytic depth") {
  TriangleMesh sphere = fx_icosphere(0.4, 4);
  EncodeConfig cfg;
  cfg.grid = SphericalGrid(64, 128);
  cfg.k = 4;
  SpMap map = encode(sphere, cfg);
  CHECK(map.truncated_pixels == 0);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 128; ++c) {
      REQUIRE(map.valid(0, r, c));
      CHECK(map.at(0, r, c) == doctest::Approx(0.4).epsilon(5e-3));
      CHECK_FALSE(map.valid(1, r, c));
      CHECK_FALSE(map.valid(2, r, c));
      CHECK_FALSE(map.valid(3, r, c));
    }
  }
}

TEST_CASE("nested shells land outermost-first in layers 0 and 1") {
  TriangleMesh shells = fx_shells();
  EncodeConfig cfg;
  cfg.grid = SphericalGrid(32, 64);
  cfg.k = 4;
  SpMap map = encode(shells, cfg);
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 64; ++c) {
      REQUIRE(map.count_valid(r, c) == 2);
      CHECK(map.at(0, r, c) == doctest::Approx(0.4).epsilon(5e-3));
      CHECK(map.at(1, r, c) == doctest::Approx(0.2).epsilon(5e-3));
    }
  }
}

TEST_CASE("layer fill equals sort-reverse-truncate of the brute hits") {
  for (const char* id : {"torus", "boxhole", "cup", "asym"}) {
    TriangleMesh mesh = make_fixture(id);
    EncodeConfig cfg;
    cfg.grid = SphericalGrid(16, 32);
    cfg.k = 4;
    cfg.seed = 99;
    SpMap map = encode(mesh, cfg);
    validate_spmap(map);
    std::uint32_t truncated = 0;
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 32; ++c) {
        auto [theta, phi] = pixel_to_angles(cfg.grid, r, c);
        Ray ray{{0, 0, 0}, sphere_dir(theta, phi)};
        int discarded = 0;
        auto brute = oracle::intersect_brute(mesh, ray,
                                             cfg.parallel_cos_threshold,
                                             &discarded);
        if (discarded > 0) continue;  // retry pixels have a perturbed ray
        std::vector<double> ts;
        for (const auto& h : brute) ts.push_back(h.t);
        auto want = oracle::reverse_truncate(ts, cfg.k);
        if (ts.size() > static_cast<std::size_t>(cfg.k)) ++truncated;
        REQUIRE_MESSAGE(map.count_valid(r, c) ==
                            static_cast<int>(want.size()),
                        id << " pixel " << r << "," << c);
        for (std::size_t l = 0; l < want.size(); ++l) {
          CHECK(std::abs(map.at(static_cast<int>(l), r, c) - want[l]) < 1e-6);
        }
      }
    }
    CHECK(map.truncated_pixels >= truncated);
  }
}

TEST_CASE("more hits than layers keeps the outermost and flags the pixel") {
  TriangleMesh cup = fx_cup();
  EncodeConfig cfg;
  cfg.grid = SphericalGrid(256, 512);
  cfg.k = 4;
  SpMap map = encode(cup, cfg);
  CHECK(map.truncated_pixels > 0);

  // The ray through the handle opening crosses 6 surfaces; its pixel keeps
  // the 4 outermost depths.
  auto [r, c] = angles_to_pixel(cfg.grid, 0.0, 0.5 * kPi);  // +x direction
  auto brute = oracle::intersect_brute(cup, {{0, 0, 0}, {1, 0, 0}}, 1e-4);
  REQUIRE(brute.size() == 6);
  REQUIRE(map.count_valid(r, c) == 4);
  for (int l = 0; l < 4; ++l) {
    CHECK(map.at(l, r, c) ==
          doctest::Approx(brute[5 - l].t).epsilon(1e-3));
  }
}

TEST_CASE("encoding is deterministic bit for bit") {
  TriangleMesh mesh = fx_asym();
  EncodeConfig cfg;
  cfg.grid = SphericalGrid(32, 64);
  cfg.k = 3;
  cfg.seed = 0x5eed;
  cfg.store_normals = true;
  SpMap a = encode(mesh, cfg);
  cfg.workers = 3;
  SpMap b = encode(mesh, cfg);
  CHECK(a.depth == b.depth);
  CHECK(a.normals == b.normals);
  CHECK(a.truncated_pixels == b.truncated_pixels);
  CHECK(a.source_hash == b.source_hash);
}

TEST_CASE("stored normals oppose the ray and match the surface") {
  TriangleMesh sphere = fx_icosphere(0.4, 4);
  EncodeConfig cfg;
  cfg.grid = SphericalGrid(32, 64);
  cfg.k = 1;
  cfg.store_normals = true;
  SpMap map = encode(sphere, cfg);
  REQUIRE(map.has_normals());
  double max_angle = 0.0;
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 64; ++c) {
      auto [theta, phi] = pixel_to_angles(cfg.grid, r, c);
      Vec3 dir = sphere_dir(theta, phi);
      std::size_t i = map.index(0, r, c);
      Vec3 n{map.normals[3 * i], map.normals[3 * i + 1],
             map.normals[3 * i + 2]};
      CHECK(dot(n, dir) < 0.0);  // flipped against the ray
      // Outward sphere normal is radial = the ray direction. Facet normals
      // tilt off the radial by up to the face circumradius angle (about 2.5
      // degrees at this tessellation); a flipped or shuffled normal is 90+.
      double cosang = std::min(1.0, std::max(-1.0, dot(n * -1.0, dir)));
      max_angle = std::max(max_angle, std::acos(cosang));
    }
  }
  CHECK(max_angle < 3.0 * kPi / 180.0);
}

TEST_CASE("unnormalized and empty meshes are rejected") {
  TriangleMesh big = fx_box(2.0, 2.0, 2.0);  // corners at radius sqrt(3)
  EncodeConfig cfg;
  cfg.grid = SphericalGrid(8, 16);
  CHECK_THROWS_AS(encode(big, cfg), UnnormalizedMesh);
  TriangleMesh empty;
  CHECK_THROWS_AS(encode(empty, cfg), EmptyMesh);
  SpMap dummy;
  cfg.k = 0;
  TriangleMesh s = fx_icosphere(0.3, 1);
  CHECK_THROWS_AS(encode(s, cfg), OutOfRange);
}

TEST_CASE("coverage: sphere is fully covered, layers only help") {
  TriangleMesh sphere = fx_icosphere(0.4, 4);
  EncodeConfig cfg;
  cfg.grid = SphericalGrid(256, 512);
  cfg.k = 1;
  SpMap map = encode(sphere, cfg);
  CHECK(coverage(sphere, map, 10000, 0.01) >= 0.99);

  TriangleMesh cup = fx_cup();
  EncodeConfig c1;
  c1.grid = SphericalGrid(128, 256);
  c1.k = 1;
  EncodeConfig c4 = c1;
  c4.k = 4;
  double cov1 = coverage(cup, encode(cup, c1), 10000, 0.02);
  double cov4 = coverage(cup, encode(cup, c4), 10000, 0.02);
  CHECK(cov4 >= cov1);
  CHECK(cov4 > cov1 + 0.05);  // the cup hides real area from layer 0

  SpMap empty_map(SphericalGrid(8, 16), 2);
  CHECK(coverage(sphere, empty_map, 100, 0.01) == 0.0);
}

TEST_CASE("layer_histogram counts pixels by valid-layer count") {
  TriangleMesh sphere = fx_icosphere(0.4, 3);
  EncodeConfig cfg;
  cfg.grid = SphericalGrid(16, 32);
  cfg.k = 2;
  SpMap map = encode(sphere, cfg);
  auto h = layer_histogram(map);
  REQUIRE(h.size() == 3);
  CHECK(h[0] == 0);
  CHECK(h[1] == 16 * 32);
  CHECK(h[2] == 0);

  SpMap shells_map = encode(fx_shells(), cfg);
  auto hs = layer_histogram(shells_map);
  CHECK(hs[2] == 16 * 32);

  SpMap blank(SphericalGrid(4, 8), 2);
  auto hb = layer_histogram(blank);
  CHECK(hb[0] == 4 * 8);
  std::size_t total = 0;
  for (std::size_t n : hs) total += n;
  CHECK(total == 16 * 32);
}

}  // TEST_SUITE
