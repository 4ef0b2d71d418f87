#include "spmap/fixtures.hpp"

#include <cmath>
#include <cstdint>
#include <map>

#include "spmap/errors.hpp"
#include "spmap/sp_grid.hpp"

namespace spmap {

namespace {

using Face = std::array<std::uint32_t, 3>;

void add_quad(TriangleMesh& m, std::uint32_t a, std::uint32_t b,
              std::uint32_t c, std::uint32_t d) {
  m.faces.push_back({a, b, c});
  m.faces.push_back({a, c, d});
}

}  // namespace

TriangleMesh flip_faces(TriangleMesh mesh) {
  for (Face& f : mesh.faces) std::swap(f[1], f[2]);
  return mesh;
}

TriangleMesh fx_box(double dx, double dy, double dz) {
  TriangleMesh m;
  double hx = dx / 2, hy = dy / 2, hz = dz / 2;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back({(i & 1) ? hx : -hx, (i & 2) ? hy : -hy,
                          (i & 4) ? hz : -hz});
  }
  add_quad(m, 0, 2, 3, 1);  // z = -hz, outward -z
  add_quad(m, 4, 5, 7, 6);  // z = +hz, outward +z
  add_quad(m, 0, 1, 5, 4);  // y = -hy, outward -y
  add_quad(m, 2, 6, 7, 3);  // y = +hy, outward +y
  add_quad(m, 0, 4, 6, 2);  // x = -hx, outward -x
  add_quad(m, 1, 3, 7, 5);  // x = +hx, outward +x
  return m;
}

TriangleMesh fx_icosphere(double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, t, 0},  {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                {0, -1, t},  {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                {t, 0, -1},  {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      std::pair<std::uint32_t, std::uint32_t> key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      std::uint32_t id = static_cast<std::uint32_t>(m.vertices.size());
      m.vertices.push_back(0.5 * (m.vertices[a] + m.vertices[b]));
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(m.faces.size() * 4);
    for (const Face& f : m.faces) {
      std::uint32_t ab = mid(f[0], f[1]);
      std::uint32_t bc = mid(f[1], f[2]);
      std::uint32_t ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.faces = std::move(next);
  }
  for (Vec3& v : m.vertices) v = radius * normalized(v);
  return m;
}

TriangleMesh fx_sphere() { return fx_icosphere(0.4, 4); }

TriangleMesh fx_shells() {
  TriangleMesh m = fx_icosphere(0.4, 4);
  append_mesh(m, flip_faces(fx_icosphere(0.2, 3)));
  return m;
}

namespace {

TriangleMesh torus_grid(double ring_radius, double tube_radius, int n_ring,
                        int n_tube) {
  TriangleMesh m;
  m.vertices.reserve(static_cast<std::size_t>(n_ring) * n_tube);
  for (int i = 0; i < n_ring; ++i) {
    double theta = 2.0 * kPi * i / n_ring;
    for (int j = 0; j < n_tube; ++j) {
      double alpha = 2.0 * kPi * j / n_tube;
      double w = ring_radius + tube_radius * std::cos(alpha);
      m.vertices.push_back(
          {w * std::cos(theta), w * std::sin(theta),
           tube_radius * std::sin(alpha)});
    }
  }
  auto vid = [&](int i, int j) {
    return static_cast<std::uint32_t>((i % n_ring) * n_tube + (j % n_tube));
  };
  for (int i = 0; i < n_ring; ++i) {
    for (int j = 0; j < n_tube; ++j) {
      add_quad(m, vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
    }
  }
  return m;
}

}  // namespace

TriangleMesh fx_torus(double ring_radius, double tube_radius, int n_ring,
                      int n_tube) {
  return torus_grid(ring_radius, tube_radius, n_ring, n_tube);
}

TriangleMesh fx_boxhole() {
  TriangleMesh m;
  const double o = 0.4, i = 0.2;
  // Corner order is counter-clockwise viewed from +z.
  const double cx[4] = {-1, 1, 1, -1};
  const double cy[4] = {-1, -1, 1, 1};
  for (int level = 0; level < 2; ++level) {
    double z = level ? o : -o;
    for (int c = 0; c < 4; ++c) m.vertices.push_back({o * cx[c], o * cy[c], z});
    for (int c = 0; c < 4; ++c) m.vertices.push_back({i * cx[c], i * cy[c], z});
  }
  auto ob = [](int c) { return static_cast<std::uint32_t>(c % 4); };
  auto ib = [](int c) { return static_cast<std::uint32_t>(4 + c % 4); };
  auto ot = [](int c) { return static_cast<std::uint32_t>(8 + c % 4); };
  auto it = [](int c) { return static_cast<std::uint32_t>(12 + c % 4); };
  for (int c = 0; c < 4; ++c) {
    add_quad(m, ob(c), ob(c + 1), ot(c + 1), ot(c));  // outer wall
    add_quad(m, ib(c + 1), ib(c), it(c), it(c + 1));  // tunnel wall
    add_quad(m, ot(c), ot(c + 1), it(c + 1), it(c));  // top ring
    add_quad(m, ob(c + 1), ob(c), ib(c), ib(c + 1));  // bottom ring
  }
  // Fixed generic pose (Rz(0.7)*Ry(0.5)*Rx(0.3)). An axis-aligned pose is a
  // degenerate best case for view-aligned sampling (planar faces land exactly
  // on sample planes), so no face or tunnel direction is left on a coordinate
  // axis. The tunnel still passes through the origin.
  const double ca = std::cos(0.7), sa = std::sin(0.7);
  const double cb = std::cos(0.5), sb = std::sin(0.5);
  const double cc = std::cos(0.3), sc = std::sin(0.3);
  for (Vec3& v : m.vertices) {
    Vec3 p{v.x, cc * v.y - sc * v.z, sc * v.y + cc * v.z};
    Vec3 q{cb * p.x + sb * p.z, p.y, -sb * p.x + cb * p.z};
    v = {ca * q.x - sa * q.y, sa * q.x + ca * q.y, q.z};
  }
  return m;
}

namespace {

// Closed surface of revolution around z. The profile runs through the
// (radius, z) half-plane from one axis point to another; outward normals
// follow the traversal (2D normal = (dz, -dr)).
TriangleMesh revolve(const std::vector<std::pair<double, double>>& profile,
                     int n_theta) {
  TriangleMesh m;
  int n = static_cast<int>(profile.size());
  // profile[0] and profile[n-1] sit on the axis (radius 0).
  m.vertices.push_back({0.0, 0.0, profile[0].second});
  m.vertices.push_back({0.0, 0.0, profile[n - 1].second});
  auto vid = [&](int i, int j) {
    return static_cast<std::uint32_t>(2 + (i - 1) * n_theta + (j % n_theta));
  };
  for (int i = 1; i + 1 < n; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      double theta = 2.0 * kPi * j / n_theta;
      m.vertices.push_back({profile[i].first * std::cos(theta),
                            profile[i].first * std::sin(theta),
                            profile[i].second});
    }
  }
  for (int j = 0; j < n_theta; ++j) {
    m.faces.push_back({0, vid(1, j + 1), vid(1, j)});          // bottom pole
    m.faces.push_back({1, vid(n - 2, j), vid(n - 2, j + 1)});  // top pole
  }
  for (int i = 1; i + 2 < n; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      add_quad(m, vid(i, j), vid(i, j + 1), vid(i + 1, j + 1), vid(i + 1, j));
    }
  }
  return m;
}

}  // namespace

TriangleMesh fx_cup() {
  // Vessel wall cross-section: outer bottom, outer wall, rim, inner wall,
  // inner bottom.  Both end points sit on the axis.
  std::vector<std::pair<double, double>> profile = {
      {0.0, -0.45}, {0.3, -0.45}, {0.3, 0.45},
      {0.25, 0.45}, {0.25, -0.35}, {0.0, -0.35}};
  TriangleMesh m = revolve(profile, 48);
  // Floating handle: a small torus in the xz-plane beside the outer wall.
  // Rays from the cavity through the handle ring cross six surfaces, which
  // exercises layer truncation at k = 4.
  TriangleMesh handle = torus_grid(0.10, 0.025, 48, 16);
  for (Vec3& v : handle.vertices) {
    v = Vec3{v.x + 0.45, -v.z, v.y};  // ring plane xy -> xz, then shift +x
  }
  append_mesh(m, handle);
  return m;
}

namespace {

TriangleMesh hemisphere(double radius, int rings, int segments, bool closed) {
  TriangleMesh m;
  m.vertices.push_back({0.0, 0.0, radius});  // pole
  for (int i = 1; i <= rings; ++i) {
    double phi = 0.5 * kPi * i / rings;
    for (int j = 0; j < segments; ++j) {
      double theta = 2.0 * kPi * j / segments;
      m.vertices.push_back({radius * std::sin(phi) * std::cos(theta),
                            radius * std::sin(phi) * std::sin(theta),
                            radius * std::cos(phi)});
    }
  }
  auto vid = [&](int i, int j) {
    return static_cast<std::uint32_t>(1 + (i - 1) * segments + (j % segments));
  };
  for (int j = 0; j < segments; ++j) {
    m.faces.push_back({0, vid(1, j), vid(1, j + 1)});
  }
  for (int i = 1; i < rings; ++i) {
    for (int j = 0; j < segments; ++j) {
      m.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      m.faces.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  if (closed) {
    std::uint32_t center = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.push_back({0.0, 0.0, 0.0});
    for (int j = 0; j < segments; ++j) {
      m.faces.push_back({center, vid(rings, j + 1), vid(rings, j)});
    }
  }
  return m;
}

}  // namespace

TriangleMesh fx_dome(int rings, int segments) {
  return hemisphere(0.4, rings, segments, false);
}

TriangleMesh fx_halfball(int rings, int segments) {
  return hemisphere(0.4, rings, segments, true);
}

TriangleMesh fx_asym() {
  TriangleMesh m = fx_icosphere(1.0, 3);
  for (Vec3& v : m.vertices) v = Vec3{0.45 * v.x, 0.3 * v.y, 0.2 * v.z};
  TriangleMesh ball = fx_icosphere(0.08, 2);
  for (Vec3& v : ball.vertices) v = v + Vec3{0.25, 0.1, 0.15};
  append_mesh(m, ball);
  return m;
}

TriangleMesh fx_perf() { return torus_grid(0.25, 0.12, 500, 100); }

const std::vector<FixtureSpec>& fixture_corpus() {
  static const std::vector<FixtureSpec> corpus = {
      {"sphere", true, +[] { return fx_sphere(); }},
      {"shells", true, +[] { return fx_shells(); }},
      {"torus", true, +[] { return fx_torus(); }},
      {"boxhole", true, +[] { return fx_boxhole(); }},
      {"cup", true, +[] { return fx_cup(); }},
      {"dome", false, +[] { return fx_dome(); }},
  };
  return corpus;
}

TriangleMesh make_fixture(const std::string& id) {
  for (const FixtureSpec& f : fixture_corpus()) {
    if (id == f.id) return f.make();
  }
  if (id == "asym") return fx_asym();
  if (id == "halfball") return fx_halfball();
  if (id == "box") return fx_box(0.8, 0.5, 0.3);
  if (id == "perf") return fx_perf();
  throw ParseError("unknown fixture id: " + id);
}

std::vector<std::string> fixture_ids() {
  std::vector<std::string> ids;
  for (const FixtureSpec& f : fixture_corpus()) ids.emplace_back(f.id);
  ids.insert(ids.end(), {"asym", "halfball", "box", "perf"});
  return ids;
}

}  // namespace spmap
