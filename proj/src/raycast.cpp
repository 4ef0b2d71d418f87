#include "spmap/raycast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spmap/errors.hpp"
#include "spmap/sp_grid.hpp"
#include "spmap/util.hpp"

namespace spmap {
namespace {

struct BuildEntry {
  std::uint32_t node;
  std::uint32_t begin, end;
};

Aabb face_box(const TriangleMesh& mesh, std::uint32_t f) {
  Aabb b;
  b.expand(mesh.face_vertex(f, 0));
  b.expand(mesh.face_vertex(f, 1));
  b.expand(mesh.face_vertex(f, 2));
  return b;
}

}  // namespace

Bvh build_bvh(const TriangleMesh& mesh) {
  if (mesh.face_count() == 0) throw EmptyMesh("build_bvh: no faces");
  std::size_t n = mesh.face_count();
  std::vector<Vec3> centroids(n);
  std::vector<Aabb> boxes(n);
  for (std::size_t f = 0; f < n; ++f) {
    boxes[f] = face_box(mesh, static_cast<std::uint32_t>(f));
    centroids[f] = boxes[f].center();
  }

  Bvh bvh;
  bvh.prims.resize(n);
  for (std::size_t i = 0; i < n; ++i) bvh.prims[i] = static_cast<std::uint32_t>(i);
  bvh.nodes.reserve(2 * n);
  bvh.nodes.emplace_back();

  std::vector<BuildEntry> stack{{0, 0, static_cast<std::uint32_t>(n)}};
  while (!stack.empty()) {
    BuildEntry e = stack.back();
    stack.pop_back();
    Aabb box;
    Aabb cbox;
    for (std::uint32_t i = e.begin; i < e.end; ++i) {
      box.expand(boxes[bvh.prims[i]]);
      cbox.expand(centroids[bvh.prims[i]]);
    }
    Bvh::Node& node = bvh.nodes[e.node];
    node.box = box;
    std::uint32_t count = e.end - e.begin;
    if (count <= 8) {
      node.first = e.begin;
      node.count = count;
      continue;
    }
    Vec3 ext = cbox.extent();
    int axis = 0;
    if (ext.y > ext.x) axis = 1;
    if (ext.z > ext[axis]) axis = 2;
    std::uint32_t mid = e.begin + count / 2;
    std::nth_element(bvh.prims.begin() + e.begin, bvh.prims.begin() + mid,
                     bvh.prims.begin() + e.end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       double ca = centroids[a][axis], cb = centroids[b][axis];
                       if (ca != cb) return ca < cb;
                       return a < b;
                     });
    std::int32_t li = static_cast<std::int32_t>(bvh.nodes.size());
    bvh.nodes.emplace_back();
    std::int32_t ri = static_cast<std::int32_t>(bvh.nodes.size());
    bvh.nodes.emplace_back();
    bvh.nodes[e.node].left = li;
    bvh.nodes[e.node].right = ri;
    stack.push_back({static_cast<std::uint32_t>(ri), mid, e.end});
    stack.push_back({static_cast<std::uint32_t>(li), e.begin, mid});
  }
  return bvh;
}

int bvh_depth(const Bvh& bvh) {
  struct Entry {
    std::int32_t node;
    int depth;
  };
  int best = 0;
  std::vector<Entry> stack{{0, 1}};
  while (!stack.empty()) {
    Entry e = stack.back();
    stack.pop_back();
    best = std::max(best, e.depth);
    const Bvh::Node& n = bvh.nodes[e.node];
    if (!n.leaf()) {
      stack.push_back({n.left, e.depth + 1});
      stack.push_back({n.right, e.depth + 1});
    }
  }
  return best;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool box_hit(const Aabb& box, const Vec3& o, const Vec3& inv) {
  // An axis with zero direction never constrains [tnear, tfar]; it only
  // rejects when the origin lies outside the slab. Bounds are inclusive so a
  // ray running inside a box face still visits the box, matching the
  // inclusive barycentric bounds of the face test.
  double tnear = -kInf, tfar = kInf;
  for (int a = 0; a < 3; ++a) {
    if (std::isinf(inv[a])) {
      if (o[a] < box.lo[a] || o[a] > box.hi[a]) return false;
      continue;
    }
    double t1 = (box.lo[a] - o[a]) * inv[a];
    double t2 = (box.hi[a] - o[a]) * inv[a];
    tnear = std::fmax(tnear, std::fmin(t1, t2));
    tfar = std::fmin(tfar, std::fmax(t1, t2));
  }
  return tnear <= tfar && tfar >= kRayTMin;
}

// Möller–Trumbore on one face. Appends a hit or bumps the discard counter.
void test_face(const TriangleMesh& mesh, std::uint32_t f, const Ray& ray,
               double parallel_cos_threshold, std::vector<Hit>& out,
               int& discarded) {
  Vec3 v0 = mesh.face_vertex(f, 0);
  Vec3 e1 = mesh.face_vertex(f, 1) - v0;
  Vec3 e2 = mesh.face_vertex(f, 2) - v0;
  Vec3 pvec = cross(ray.direction, e2);
  double det = dot(e1, pvec);
  Vec3 scaled_n = cross(e1, e2);  // length = 2 * area
  double nlen = norm(scaled_n);
  if (nlen == 0.0 || det == 0.0) return;  // degenerate face or in-plane ray
  double inv = 1.0 / det;
  Vec3 tvec = ray.origin - v0;
  double u = dot(tvec, pvec) * inv;
  if (u < 0.0 || u > 1.0) return;
  Vec3 qvec = cross(tvec, e1);
  double v = dot(ray.direction, qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return;
  double t = dot(e2, qvec) * inv;
  if (t <= kRayTMin) return;
  double cos_inc = std::fabs(det) / nlen;
  if (cos_inc < parallel_cos_threshold) {
    ++discarded;
    return;
  }
  out.push_back({t, f, scaled_n / nlen, cos_inc});
}

}  // namespace

HitList intersect_all(const Bvh& bvh, const TriangleMesh& mesh, const Ray& ray,
                      double parallel_cos_threshold) {
  HitList result;
  Vec3 inv{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
  std::int32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Bvh::Node& node = bvh.nodes[stack[--top]];
    if (!box_hit(node.box, ray.origin, inv)) continue;
    if (node.leaf()) {
      for (std::uint32_t i = 0; i < node.count; ++i) {
        test_face(mesh, bvh.prims[node.first + i], ray, parallel_cos_threshold,
                  result.hits, result.discarded_parallel);
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  std::sort(result.hits.begin(), result.hits.end(), [](const Hit& a, const Hit& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.face_id < b.face_id;
  });
  // Shared edges/vertices double-count; keep the first of each merge run.
  std::vector<Hit> merged;
  merged.reserve(result.hits.size());
  for (const Hit& h : result.hits) {
    if (!merged.empty() && h.t - merged.back().t <= kHitMergeEps) continue;
    merged.push_back(h);
  }
  result.hits = std::move(merged);
  return result;
}

Vec3 perturb_direction(const Vec3& dir, double sigma, std::uint64_t seed) {
  // Box-Muller over splitmix64 streams: avoids the implementation-defined
  // std::normal_distribution so perturbations are stable for a given seed.
  double g[4];
  for (int i = 0; i < 2; ++i) {
    double u1 = (splitmix64(seed + 2 * i) >> 11) * 0x1p-53;
    double u2 = (splitmix64(seed + 2 * i + 1) >> 11) * 0x1p-53;
    if (u1 <= 0.0) u1 = 0x1p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    g[2 * i] = r * std::cos(2.0 * kPi * u2);
    g[2 * i + 1] = r * std::sin(2.0 * kPi * u2);
  }
  Vec3 perturbed = dir + Vec3{g[0], g[1], g[2]} * sigma;
  double n = norm(perturbed);
  return n > 0.0 ? perturbed / n : dir;
}

HitList intersect_all_with_retry(const Bvh& bvh, const TriangleMesh& mesh,
                                 const Ray& ray, double parallel_cos_threshold,
                                 double perturb_sigma, std::uint64_t seed) {
  HitList first = intersect_all(bvh, mesh, ray, parallel_cos_threshold);
  if (first.discarded_parallel == 0) return first;
  Ray retry{ray.origin, perturb_direction(ray.direction, perturb_sigma, seed)};
  HitList second = intersect_all(bvh, mesh, retry, parallel_cos_threshold);
  second.retried = true;
  return second;
}

}  // namespace spmap
