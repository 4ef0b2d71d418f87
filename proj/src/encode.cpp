#include "spmap/encode.hpp"

#include <cmath>

#include "spmap/decode.hpp"
#include "spmap/kdtree.hpp"
#include "spmap/util.hpp"

namespace spmap {

SpMap encode(const TriangleMesh& mesh, const EncodeConfig& cfg) {
  if (cfg.k < 1) throw OutOfRange("encode: k must be >= 1");
  for (const Vec3& v : mesh.vertices) {
    if (norm(v) > kMaxDepth + 1e-6) {
      throw UnnormalizedMesh("encode: vertex at radius " +
                             format_double(norm(v)) +
                             " outside the sqrt(3)/2 sphere");
    }
  }
  Bvh bvh = build_bvh(mesh);

  SpMap map(cfg.grid, cfg.k);
  if (cfg.store_normals) map.normals.assign(3 * map.sample_count(), 0.0f);
  map.source_hash = mesh_hash(mesh);
  int H = cfg.grid.H, W = cfg.grid.W;
  std::vector<std::uint8_t> truncated(cfg.grid.pixel_count(), 0);

  parallel_for(cfg.grid.pixel_count(), cfg.workers, [&](std::size_t pix) {
    int r = static_cast<int>(pix) / W;
    int c = static_cast<int>(pix) % W;
    auto [theta, phi] = pixel_to_angles(cfg.grid, r, c);
    Ray ray{{0.0, 0.0, 0.0}, sphere_dir(theta, phi)};
    std::uint64_t pixel_seed =
        splitmix64(cfg.seed + pix * 0x9e3779b97f4a7c15ULL);
    HitList hl = intersect_all_with_retry(bvh, mesh, ray,
                                          cfg.parallel_cos_threshold,
                                          cfg.perturb_sigma, pixel_seed);
    std::size_t m = hl.hits.size();
    if (m > static_cast<std::size_t>(cfg.k)) truncated[pix] = 1;
    std::size_t fill = std::min<std::size_t>(m, cfg.k);
    for (std::size_t j = 0; j < fill; ++j) {
      const Hit& h = hl.hits[m - 1 - j];  // outermost first
      std::size_t idx = map.index(static_cast<int>(j), r, c);
      map.depth[idx] = static_cast<float>(h.t);
      if (cfg.store_normals) {
        Vec3 n = h.normal;
        if (dot(n, ray.direction) > 0.0) n = -n;
        map.normals[3 * idx] = static_cast<float>(n.x);
        map.normals[3 * idx + 1] = static_cast<float>(n.y);
        map.normals[3 * idx + 2] = static_cast<float>(n.z);
      }
    }
  });
  std::uint32_t count = 0;
  for (std::uint8_t t : truncated) count += t;
  map.truncated_pixels = count;
  (void)H;
  validate_spmap(map);
  return map;
}

double coverage(const TriangleMesh& mesh, const SpMap& map,
                std::size_t n_samples, double tol, std::uint64_t seed) {
  bool any_valid = false;
  for (float d : map.depth) {
    if (d > 0.0f) {
      any_valid = true;
      break;
    }
  }
  if (!any_valid || n_samples == 0) return 0.0;
  OrientedPointCloud cloud = unproject_map(map);
  KdTree tree(cloud.points);
  std::vector<Vec3> samples = sample_surface(mesh, n_samples, seed);
  std::size_t covered = 0;
  for (const Vec3& p : samples) {
    if (tree.nearest_dist(p) <= tol) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(n_samples);
}

std::vector<std::size_t> layer_histogram(const SpMap& map) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(map.k) + 1, 0);
  for (int r = 0; r < map.grid.H; ++r) {
    for (int c = 0; c < map.grid.W; ++c) {
      ++counts[map.count_valid(r, c)];
    }
  }
  return counts;
}

}  // namespace spmap
