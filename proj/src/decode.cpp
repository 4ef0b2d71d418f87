#include "spmap/decode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include "spmap/sp_grid.hpp"
#include "spmap/util.hpp"

namespace spmap {
namespace {

Vec3 sample_point(const SpMap& map, int l, int r, int c) {
  auto [theta, phi] = pixel_to_angles(map.grid, r, c);
  return sphere_dir(theta, phi) * static_cast<double>(map.at(l, r, c));
}

}  // namespace

OrientedPointCloud unproject_map(const SpMap& map) {
  OrientedPointCloud cloud;
  int H = map.grid.H, W = map.grid.W;
  for (int l = 0; l < map.k; ++l) {
    for (int r = 0; r < H; ++r) {
      for (int c = 0; c < W; ++c) {
        if (!map.valid(l, r, c)) continue;
        Vec3 p = sample_point(map, l, r, c);
        Vec3 dir = normalized(p);
        Vec3 n;
        if (map.has_normals()) {
          std::size_t i = 3 * map.index(l, r, c);
          n = {map.normals[i], map.normals[i + 1], map.normals[i + 2]};
        } else {
          // Tangent plane from grid neighbors; central differences where
          // both sides are valid, one-sided otherwise.
          int ce = (c + 1) % W, cw = (c - 1 + W) % W;
          Vec3 de, dr;
          bool has_e = map.valid(l, r, ce), has_w = map.valid(l, r, cw);
          if (has_e && has_w) {
            de = sample_point(map, l, r, ce) - sample_point(map, l, r, cw);
          } else if (has_e) {
            de = sample_point(map, l, r, ce) - p;
          } else if (has_w) {
            de = p - sample_point(map, l, r, cw);
          }
          bool has_s = r + 1 < H && map.valid(l, r + 1, c);
          bool has_n = r - 1 >= 0 && map.valid(l, r - 1, c);
          if (has_s && has_n) {
            dr = sample_point(map, l, r + 1, c) - sample_point(map, l, r - 1, c);
          } else if (has_s) {
            dr = sample_point(map, l, r + 1, c) - p;
          } else if (has_n) {
            dr = p - sample_point(map, l, r - 1, c);
          }
          n = cross(dr, de);
          if (norm(n) < 1e-30) {
            n = -dir;  // isolated sample: radial fallback
          } else {
            n = normalized(n);
            if (dot(n, dir) > 0.0) n = -n;
          }
        }
        cloud.points.push_back(p);
        cloud.normals.push_back(n);
        cloud.layer_of.push_back(l);
      }
    }
  }
  if (cloud.points.empty()) throw EmptyMap("unproject_map: no valid samples");
  return cloud;
}

OccupancyGrid::OccupancyGrid(int N) {
  if (N < 8) throw OutOfRange("OccupancyGrid: N must be >= 8");
  n = N;
  half = 0.5 * N / (N - 4);
  occ.assign(static_cast<std::size_t>(N) * N * N, 0);
}

std::size_t OccupancyGrid::occupied_count() const {
  std::size_t c = 0;
  for (std::uint8_t v : occ) c += v;
  return c;
}

OccupancyGrid occupancy_from_map(const SpMap& map, int N, int workers) {
  if (map.truncated_pixels > 0) {
    throw TruncatedMap("occupancy_from_map: " +
                       std::to_string(map.truncated_pixels) +
                       " truncated pixels make parity unreliable");
  }
  OccupancyGrid grid(N);
  parallel_for(static_cast<std::size_t>(N), workers, [&](std::size_t izs) {
    int iz = static_cast<int>(izs);
    for (int iy = 0; iy < N; ++iy) {
      for (int ix = 0; ix < N; ++ix) {
        Vec3 v = grid.center(ix, iy, iz);
        double radius = norm(v);
        int r, c;
        if (radius < 1e-15) {
          // Odd-N center voxel sits exactly at the origin; any ray serves.
          r = map.grid.H / 2;
          c = 0;
          radius = 0.0;
        } else {
          SphericalCoords s = project(v);
          auto rc = angles_to_pixel(map.grid, s.theta, s.phi);
          r = rc.first;
          c = rc.second;
        }
        int crossings = 0;
        for (int l = 0; l < map.k; ++l) {
          float d = map.at(l, r, c);
          if (d <= 0.0f) break;  // front-packed
          if (static_cast<double>(d) > radius) ++crossings;
        }
        grid.occ[grid.index(ix, iy, iz)] =
            static_cast<std::uint8_t>(crossings & 1);
      }
    }
  });
  return grid;
}

// ---------------------------------------------------------------------------
// Marching cubes.
//
// Corner i has offsets (i&1, (i>>1)&1, (i>>2)&1). The 256-entry case table is
// derived once at startup: for every inside-mask, face crossings are paired
// with a fixed ambiguous-face rule (the two diagonal inside corners stay
// separated), the resulting segments chain into closed cycles, and each cycle
// is fan-triangulated with its normal oriented from the inside corners it
// encloses toward the outside. The fixed rule is shared by the two cells
// adjacent to any face, which makes the extracted surface crack-free, closed,
// and 2-manifold for fields that vanish at the lattice boundary.
// ---------------------------------------------------------------------------
namespace mc {

struct Tables {
  // Per config: triangles as triples of edge ids.
  std::array<std::vector<std::array<int, 3>>, 256> tris;
  std::array<std::array<int, 2>, 12> edge_corners;
};

Vec3 corner_pos(int corner) {
  return {static_cast<double>(corner & 1), static_cast<double>((corner >> 1) & 1),
          static_cast<double>((corner >> 2) & 1)};
}

const Tables& tables() {
  static const Tables t = [] {
    Tables tb;
    // Edges: corner pairs differing in exactly one bit, fixed enumeration.
    int ne = 0;
    int edge_of[8][8];
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b) edge_of[a][b] = -1;
    for (int a = 0; a < 8; ++a) {
      for (int bit = 0; bit < 3; ++bit) {
        int b = a ^ (1 << bit);
        if (b > a) {
          tb.edge_corners[ne] = {a, b};
          edge_of[a][b] = edge_of[b][a] = ne;
          ++ne;
        }
      }
    }
    // Faces: (axis, side) with the 4 corners on that face.
    struct Face {
      std::array<int, 4> corners;  // cyclic order around the face
    };
    std::array<Face, 6> faces;
    int fi = 0;
    for (int axis = 0; axis < 3; ++axis) {
      for (int side = 0; side < 2; ++side) {
        std::array<int, 4> cs{};
        int nc = 0;
        for (int c = 0; c < 8; ++c) {
          if (((c >> axis) & 1) == side) cs[nc++] = c;
        }
        // cs is in lexicographic order (u, v) over the other two axes:
        // reorder to a cycle u0v0, u1v0, u1v1, u0v1.
        faces[fi++].corners = {cs[0], cs[1], cs[3], cs[2]};
      }
    }

    for (int mask = 0; mask < 256; ++mask) {
      auto inside = [&](int corner) { return (mask >> corner) & 1; };
      // Directed segments between crossing edges; each face contributes
      // segments directed so that inside corners lie to the segment's LEFT
      // when viewed from outside the cube through that face. Direction is
      // recovered implicitly by cycle orientation below, so undirected
      // adjacency suffices here.
      std::vector<std::array<int, 2>> segments;
      for (const Face& face : faces) {
        std::array<int, 4> cross_edge{};
        int ncross = 0;
        for (int e = 0; e < 4; ++e) {
          int a = face.corners[e], b = face.corners[(e + 1) % 4];
          if (inside(a) != inside(b)) cross_edge[ncross++] = edge_of[a][b];
        }
        if (ncross == 2) {
          segments.push_back({cross_edge[0], cross_edge[1]});
        } else if (ncross == 4) {
          // Ambiguous face: insides sit on a diagonal and every face edge
          // crosses. Fixed rule: pair the two crossings flanking each
          // inside corner, keeping the inside corners separated. Both
          // cells sharing the face see the same corner flags, so the rule
          // is crack-free.
          for (int i = 0; i < 4; ++i) {
            int ci = face.corners[i];
            if (!inside(ci)) continue;
            int prev = face.corners[(i + 3) % 4];
            int next = face.corners[(i + 1) % 4];
            segments.push_back({edge_of[prev][ci], edge_of[ci][next]});
          }
        }
      }
      // Chain segments into cycles.
      std::vector<bool> used(segments.size(), false);
      for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
        if (used[s0]) continue;
        std::vector<int> cycle{segments[s0][0], segments[s0][1]};
        used[s0] = true;
        while (cycle.front() != cycle.back()) {
          bool advanced = false;
          for (std::size_t s = 0; s < segments.size(); ++s) {
            if (used[s]) continue;
            if (segments[s][0] == cycle.back()) {
              cycle.push_back(segments[s][1]);
              used[s] = true;
              advanced = true;
              break;
            }
            if (segments[s][1] == cycle.back()) {
              cycle.push_back(segments[s][0]);
              used[s] = true;
              advanced = true;
              break;
            }
          }
          if (!advanced) break;  // cannot happen for valid configs
        }
        cycle.pop_back();  // drop the repeated closing vertex
        if (cycle.size() < 3) continue;

        // Orient: normal should point from the enclosed inside corners
        // toward the outside.
        Vec3 centroid{0, 0, 0};
        std::array<Vec3, 12> epos;
        for (int e : cycle) {
          auto [a, b] = tb.edge_corners[e];
          epos[e] = (corner_pos(a) + corner_pos(b)) * 0.5;
        }
        for (int e : cycle) centroid += epos[e];
        centroid = centroid / static_cast<double>(cycle.size());
        Vec3 inside_centroid{0, 0, 0};
        int n_inside = 0;
        for (int e : cycle) {
          auto [a, b] = tb.edge_corners[e];
          int ic = inside(a) ? a : b;
          inside_centroid += corner_pos(ic);
          ++n_inside;
        }
        inside_centroid = inside_centroid / static_cast<double>(n_inside);
        Vec3 normal{0, 0, 0};  // Newell
        for (std::size_t i = 0; i < cycle.size(); ++i) {
          const Vec3& p = epos[cycle[i]];
          const Vec3& q = epos[cycle[(i + 1) % cycle.size()]];
          normal += cross(p, q);
        }
        if (dot(normal, centroid - inside_centroid) < 0.0) {
          std::reverse(cycle.begin(), cycle.end());
        }
        for (std::size_t i = 1; i + 1 < cycle.size(); ++i) {
          tb.tris[mask].push_back({cycle[0], cycle[i], cycle[i + 1]});
        }
      }
    }
    return tb;
  }();
  return t;
}

}  // namespace mc

TriangleMesh marching_cubes(const OccupancyGrid& grid) {
  if (grid.occupied_count() == 0) throw EmptyGrid("marching_cubes: empty grid");
  int N = grid.n;
  std::size_t total = static_cast<std::size_t>(N) * N * N;

  // 3^3 box filter as three separable neighbor-count passes (clamped to
  // empty outside the lattice); field range 0..27, iso 13.5.
  std::vector<std::uint8_t> a(grid.occ), b(total);
  auto pass = [&](const std::vector<std::uint8_t>& src,
                  std::vector<std::uint8_t>& dst, std::size_t stride, int axis_n,
                  std::size_t outer_a, std::size_t stride_a, std::size_t outer_b,
                  std::size_t stride_b) {
    for (std::size_t i = 0; i < outer_a; ++i) {
      for (std::size_t j = 0; j < outer_b; ++j) {
        std::size_t base = i * stride_a + j * stride_b;
        for (int x = 0; x < axis_n; ++x) {
          std::size_t idx = base + static_cast<std::size_t>(x) * stride;
          int s = src[idx];
          if (x > 0) s += src[idx - stride];
          if (x + 1 < axis_n) s += src[idx + stride];
          dst[idx] = static_cast<std::uint8_t>(s);
        }
      }
    }
  };
  std::size_t sN = static_cast<std::size_t>(N);
  pass(a, b, 1, N, sN, sN * sN, sN, sN);          // x pass (outer: z, y)
  pass(b, a, sN, N, sN, sN * sN, sN, 1);          // y pass (outer: z, x)
  pass(a, b, sN * sN, N, sN, sN, sN, 1);          // z pass (outer: y, x)
  const std::vector<std::uint8_t>& field = b;     // 0..27
  constexpr double kIso = 13.5;
  auto inside = [&](std::size_t idx) { return field[idx] > kIso; };

  const mc::Tables& tb = mc::tables();
  TriangleMesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> vertex_of;
  double vs = grid.voxel_size();
  Vec3 origin{-grid.half + 0.5 * vs, -grid.half + 0.5 * vs, -grid.half + 0.5 * vs};

  auto lattice = [&](int x, int y, int z) {
    return (static_cast<std::size_t>(z) * N + y) * N + x;
  };
  // Grid edge id: lattice point index * 3 + axis.
  auto edge_vertex = [&](int x, int y, int z, int axis) -> std::uint32_t {
    std::uint64_t key = (lattice(x, y, z)) * 3 + static_cast<std::uint64_t>(axis);
    auto it = vertex_of.find(key);
    if (it != vertex_of.end()) return it->second;
    std::size_t i0 = lattice(x, y, z);
    int x1 = x + (axis == 0), y1 = y + (axis == 1), z1 = z + (axis == 2);
    std::size_t i1 = lattice(x1, y1, z1);
    double f0 = field[i0], f1 = field[i1];
    double t = (kIso - f0) / (f1 - f0);
    Vec3 p0 = origin + Vec3{x * vs, y * vs, z * vs};
    Vec3 p1 = origin + Vec3{x1 * vs, y1 * vs, z1 * vs};
    Vec3 p = p0 + (p1 - p0) * t;
    std::uint32_t id = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(p);
    vertex_of.emplace(key, id);
    return id;
  };

  for (int z = 0; z + 1 < N; ++z) {
    for (int y = 0; y + 1 < N; ++y) {
      for (int x = 0; x + 1 < N; ++x) {
        int mask = 0;
        for (int c = 0; c < 8; ++c) {
          if (inside(lattice(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1)))) {
            mask |= 1 << c;
          }
        }
        if (mask == 0 || mask == 255) continue;
        for (const auto& tri : tb.tris[mask]) {
          std::uint32_t v[3];
          for (int i = 0; i < 3; ++i) {
            auto [ca, cb] = tb.edge_corners[tri[i]];
            int low = ca < cb ? ca : cb;   // edge axis from differing bit
            int high = ca ^ cb;
            int axis = high == 1 ? 0 : (high == 2 ? 1 : 2);
            v[i] = edge_vertex(x + (low & 1), y + ((low >> 1) & 1),
                               z + ((low >> 2) & 1), axis);
          }
          if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2]) continue;
          mesh.faces.push_back({v[0], v[1], v[2]});
        }
      }
    }
  }
  // Features below the filter's support (isolated voxels, one-voxel shells)
  // smooth to less than the iso level and leave nothing to extract.
  if (mesh.faces.empty()) {
    throw EmptyGrid("marching_cubes: no surface at the filtered iso level");
  }
  return mesh;
}

TriangleMesh grid_triangulate(const SpMap& map, double discontinuity_tol) {
  int H = map.grid.H, W = map.grid.W;
  std::vector<float> depths;
  for (float d : map.depth) {
    if (d > 0.0f) depths.push_back(d);
  }
  if (depths.empty()) throw EmptyMap("grid_triangulate: no valid samples");
  double tol = discontinuity_tol;
  if (tol < 0.0) {
    std::nth_element(depths.begin(), depths.begin() + depths.size() / 2,
                     depths.end());
    tol = 4.0 * (2.0 * kPi / W) * depths[depths.size() / 2];
  }

  TriangleMesh mesh;
  std::vector<std::uint32_t> vid(map.sample_count(), 0xffffffffu);
  auto vertex = [&](int l, int r, int c) -> std::uint32_t {
    std::size_t i = map.index(l, r, c);
    if (vid[i] == 0xffffffffu) {
      vid[i] = static_cast<std::uint32_t>(mesh.vertices.size());
      mesh.vertices.push_back(sample_point(map, l, r, c));
    }
    return vid[i];
  };
  auto edge_ok = [&](int l, int r0, int c0, int r1, int c1) {
    float a = map.at(l, r0, c0), d = map.at(l, r1, c1);
    return std::fabs(static_cast<double>(a) - static_cast<double>(d)) < tol;
  };

  for (int l = 0; l < map.k; ++l) {
    for (int r = 0; r + 1 < H; ++r) {
      for (int c = 0; c < W; ++c) {
        int ce = (c + 1) % W;
        if (!map.valid(l, r, c) || !map.valid(l, r, ce) ||
            !map.valid(l, r + 1, c) || !map.valid(l, r + 1, ce)) {
          continue;
        }
        if (!edge_ok(l, r, c, r, ce) || !edge_ok(l, r + 1, c, r + 1, ce) ||
            !edge_ok(l, r, c, r + 1, c) || !edge_ok(l, r, ce, r + 1, ce)) {
          continue;
        }
        std::uint32_t A = vertex(l, r, c), B = vertex(l, r, ce);
        std::uint32_t C = vertex(l, r + 1, ce), D = vertex(l, r + 1, c);
        mesh.faces.push_back({A, D, C});
        mesh.faces.push_back({A, C, B});
      }
    }
    // Pole fans when the full first/last ring is valid and consistent.
    for (int pole = 0; pole < 2; ++pole) {
      int r = pole == 0 ? 0 : H - 1;
      bool ok = true;
      double sum = 0.0;
      for (int c = 0; c < W && ok; ++c) {
        if (!map.valid(l, r, c) || !edge_ok(l, r, c, r, (c + 1) % W)) ok = false;
        else sum += map.at(l, r, c);
      }
      if (!ok) continue;
      double mean = sum / W;
      std::uint32_t pv = static_cast<std::uint32_t>(mesh.vertices.size());
      mesh.vertices.push_back({0.0, 0.0, pole == 0 ? mean : -mean});
      for (int c = 0; c < W; ++c) {
        std::uint32_t v0 = vertex(l, r, c), v1 = vertex(l, r, (c + 1) % W);
        if (pole == 0) mesh.faces.push_back({pv, v0, v1});
        else mesh.faces.push_back({pv, v1, v0});
      }
    }
  }
  return mesh;
}

}  // namespace spmap
