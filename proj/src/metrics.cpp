#include "spmap/metrics.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>

#include "spmap/kdtree.hpp"
#include "spmap/raycast.hpp"
#include "spmap/util.hpp"
#include "spmap/winding.hpp"

namespace spmap {

void normalize_unit(TriangleMesh& mesh) {
  if (mesh.vertices.empty()) throw EmptyMesh("normalize_unit: empty mesh");
  normalize_mesh(mesh, 2.0);
}

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw EmptySet("chamfer: empty point set");
  KdTree ta(a), tb(b);
  double sum_ab = 0.0;
  for (const Vec3& p : a) sum_ab += tb.nearest_dist(p);
  double sum_ba = 0.0;
  for (const Vec3& p : b) sum_ba += ta.nearest_dist(p);
  return 0.5 * (sum_ab / a.size() + sum_ba / b.size());
}

double f_score(const std::vector<Vec3>& a, const std::vector<Vec3>& b,
               double tau) {
  if (a.empty() || b.empty()) throw EmptySet("f_score: empty point set");
  KdTree ta(a), tb(b);
  std::size_t na = 0, nb = 0;
  for (const Vec3& p : a) {
    if (tb.nearest_dist(p) <= tau) ++na;
  }
  for (const Vec3& p : b) {
    if (ta.nearest_dist(p) <= tau) ++nb;
  }
  double precision = static_cast<double>(na) / a.size();
  double recall = static_cast<double>(nb) / b.size();
  if (precision + recall == 0.0) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

namespace {

// Voxel inside flags over [-1,1]^3 at voxel centers via fast winding.
std::vector<std::uint8_t> voxelize_unit(const TriangleMesh& mesh, int N,
                                        int workers, const char* who) {
  if (mesh.face_count() == 0) throw EmptyMesh("volume_iou: empty mesh");
  Bvh bvh = build_bvh(mesh);
  FastWinding fw(mesh, bvh);
  std::size_t total = static_cast<std::size_t>(N) * N * N;
  std::vector<std::uint8_t> inside(total, 0);
  std::vector<std::uint8_t> bad(total, 0);
  parallel_for(static_cast<std::size_t>(N), workers, [&](std::size_t izs) {
    int iz = static_cast<int>(izs);
    double vs = 2.0 / N;
    for (int iy = 0; iy < N; ++iy) {
      for (int ix = 0; ix < N; ++ix) {
        Vec3 q{-1.0 + (ix + 0.5) * vs, -1.0 + (iy + 0.5) * vs,
               -1.0 + (iz + 0.5) * vs};
        double w = fw.eval(q);
        std::size_t i = (static_cast<std::size_t>(iz) * N + iy) * N + ix;
        if (std::fabs(w - std::llround(w)) > 0.25) bad[i] = 1;
        inside[i] = winding_inside(w) ? 1 : 0;
      }
    }
  });
  std::size_t nbad = 0;
  for (std::uint8_t v : bad) nbad += v;
  if (nbad > total / 100) {
    throw NonWatertight(std::string("volume_iou: ") + who + " has " +
                        std::to_string(nbad) + "/" + std::to_string(total) +
                        " voxels with non-integer winding");
  }
  return inside;
}

}  // namespace

double volume_iou(const TriangleMesh& a, const TriangleMesh& b, int N,
                  int workers) {
  std::vector<std::uint8_t> ia = voxelize_unit(a, N, workers, "first mesh");
  std::vector<std::uint8_t> ib = voxelize_unit(b, N, workers, "second mesh");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < ia.size(); ++i) {
    inter += ia[i] & ib[i];
    uni += ia[i] | ib[i];
  }
  if (uni == 0) return 1.0;  // both empty volumes agree
  return static_cast<double>(inter) / static_cast<double>(uni);
}

const std::vector<Rotation>& octahedral_rotations() {
  static const std::vector<Rotation> rots = [] {
    // All signed permutation matrices with determinant +1; generated in a
    // fixed lexicographic order, then the identity moved to id 0.
    std::vector<Rotation> all;
    int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                       {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (auto& p : perms) {
      for (int sx = -1; sx <= 1; sx += 2) {
        for (int sy = -1; sy <= 1; sy += 2) {
          for (int sz = -1; sz <= 1; sz += 2) {
            Rotation r;
            r.m = {{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
            int sign[3] = {sx, sy, sz};
            for (int row = 0; row < 3; ++row) r.m[row][p[row]] = sign[row];
            double det =
                r.m[0][0] * (r.m[1][1] * r.m[2][2] - r.m[1][2] * r.m[2][1]) -
                r.m[0][1] * (r.m[1][0] * r.m[2][2] - r.m[1][2] * r.m[2][0]) +
                r.m[0][2] * (r.m[1][0] * r.m[2][1] - r.m[1][1] * r.m[2][0]);
            if (det > 0.5) all.push_back(r);
          }
        }
      }
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
      bool ident = all[i].m[0][0] == 1 && all[i].m[1][1] == 1 && all[i].m[2][2] == 1;
      if (ident && i != 0) std::swap(all[0], all[i]);
    }
    for (std::size_t i = 0; i < all.size(); ++i) all[i].id = static_cast<int>(i);
    return all;
  }();
  return rots;
}

AlignResult align_rotation(const TriangleMesh& pred, const TriangleMesh& gt,
                           std::size_t samples, std::uint64_t seed,
                           bool refine_azimuth) {
  TriangleMesh p = pred, g = gt;
  normalize_unit(p);
  normalize_unit(g);
  std::vector<Vec3> ps = sample_surface(p, samples, seed);
  std::vector<Vec3> gs = sample_surface(g, samples, seed);

  AlignResult best;
  best.chamfer = 1e300;
  std::vector<Vec3> rotated(ps.size());
  auto try_rotation = [&](const Rotation& r) {
    for (std::size_t i = 0; i < ps.size(); ++i) rotated[i] = r.apply(ps[i]);
    double cd = chamfer(rotated, gs);
    if (cd < best.chamfer) {
      best.chamfer = cd;
      best.rotation = r;
    }
  };
  for (const Rotation& r : octahedral_rotations()) try_rotation(r);

  if (refine_azimuth) {
    Rotation base = best.rotation;
    for (int step = 1; step < 24; ++step) {
      double ang = step * (15.0 * kPi / 180.0);
      double ca = std::cos(ang), sa = std::sin(ang);
      Rotation rz;
      rz.m = {{{ca, -sa, 0}, {sa, ca, 0}, {0, 0, 1}}};
      Rotation composed;
      composed.id = base.id + 24 * step;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          composed.m[i][j] = 0.0;
          for (int k = 0; k < 3; ++k) composed.m[i][j] += rz.m[i][k] * base.m[k][j];
        }
      }
      try_rotation(composed);
    }
  }
  return best;
}

double regional_abs_rel(const SpMap& map, const SpMap& ref, Region region) {
  if (!(map.grid == ref.grid) || map.k != ref.k) {
    throw GridMismatch("regional_abs_rel: shape mismatch");
  }
  int H = map.grid.H, W = map.grid.W;
  int polar_rows = static_cast<int>(std::ceil(0.15 * H));
  int eq_count = static_cast<int>(std::lround(0.30 * H));
  int eq_start = (H - eq_count) / 2;
  auto in_region = [&](int r, int c) {
    switch (region) {
      case Region::kSeam:
        return c < 2 || c >= W - 2;
      case Region::kPolar:
        return r < polar_rows || r >= H - polar_rows;
      case Region::kEquator:
        return r >= eq_start && r < eq_start + eq_count;
      case Region::kAll:
        return true;
    }
    return false;
  };
  double sum = 0.0;
  std::size_t n = 0;
  for (int l = 0; l < map.k; ++l) {
    for (int r = 0; r < H; ++r) {
      for (int c = 0; c < W; ++c) {
        if (!in_region(r, c)) continue;
        if (!map.valid(l, r, c) || !ref.valid(l, r, c)) continue;
        double dm = map.at(l, r, c), dr = ref.at(l, r, c);
        sum += std::fabs(dm - dr) / dr;
        ++n;
      }
    }
  }
  if (n == 0) return std::nan("");
  return sum / static_cast<double>(n);
}

std::uint64_t deflated_size(const std::vector<unsigned char>& bytes) {
  uLongf bound = compressBound(static_cast<uLong>(bytes.size()));
  std::vector<unsigned char> out(bound);
  uLongf out_len = bound;
  int rc = compress2(out.data(), &out_len, bytes.data(),
                     static_cast<uLong>(bytes.size()), 6);
  if (rc != Z_OK) throw IoError("deflate failed: zlib rc " + std::to_string(rc));
  return out_len;
}

std::uint64_t storage_bytes(const SpMap& map, StorageMode mode) {
  std::vector<unsigned char> bytes = spm_bytes(map);
  if (mode == StorageMode::kRaw) return bytes.size();
  return deflated_size(bytes);
}

}  // namespace spmap
