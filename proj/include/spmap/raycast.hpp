#pragma once

#include <cstdint>
#include <vector>

#include "spmap/mesh.hpp"

namespace spmap {

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct Hit {
  double t = 0.0;
  std::uint32_t face_id = 0;
  Vec3 normal;             // unit face normal, orientation as authored
  double cos_incidence = 0.0;  // |dot(direction, normal)|
};

// All intersections of one ray, ascending in t, duplicates merged.
// discarded_parallel counts would-be hits rejected by the incidence
// threshold; retried marks results produced by the perturbed re-cast.
struct HitList {
  std::vector<Hit> hits;
  int discarded_parallel = 0;
  bool retried = false;
};

// Median-split BVH over face bounding boxes, leaf size <= 8.
struct Bvh {
  struct Node {
    Aabb box;
    std::int32_t left = -1;    // internal: child node ids
    std::int32_t right = -1;
    std::uint32_t first = 0;   // leaf: range into prims
    std::uint32_t count = 0;
    bool leaf() const { return count > 0; }
  };
  std::vector<Node> nodes;           // root at 0
  std::vector<std::uint32_t> prims;  // permuted face ids
};

inline constexpr double kRayTMin = 1e-6;
inline constexpr double kHitMergeEps = 1e-6;
inline constexpr double kDefaultParallelCos = 1e-4;
inline constexpr double kDefaultPerturbSigma = 1e-5;

Bvh build_bvh(const TriangleMesh& mesh);  // EmptyMesh on zero faces
int bvh_depth(const Bvh& bvh);

// Every hit with t > kRayTMin, sorted ascending, hits closer than
// kHitMergeEps in t merged, near-parallel hits discarded and counted.
HitList intersect_all(const Bvh& bvh, const TriangleMesh& mesh, const Ray& ray,
                      double parallel_cos_threshold = kDefaultParallelCos);

// As intersect_all; when >= 1 near-parallel hit was discarded, re-casts once
// with the direction perturbed by a seed-deterministic Gaussian offset of
// scale perturb_sigma and returns the retry result wholesale.
HitList intersect_all_with_retry(const Bvh& bvh, const TriangleMesh& mesh,
                                 const Ray& ray, double parallel_cos_threshold,
                                 double perturb_sigma, std::uint64_t seed);

// Perturbed unit direction used by the retry path (exposed for tests).
Vec3 perturb_direction(const Vec3& dir, double sigma, std::uint64_t seed);

}  // namespace spmap
