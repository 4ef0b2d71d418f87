#include "spmap/nested.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "spmap/raycast.hpp"
#include "spmap/util.hpp"

namespace spmap {

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::kPosX: return "+x";
    case Axis::kNegX: return "-x";
    case Axis::kPosY: return "+y";
    case Axis::kNegY: return "-y";
    case Axis::kPosZ: return "+z";
    case Axis::kNegZ: return "-z";
  }
  return "?";
}

Vec3 axis_direction(Axis a) {
  switch (a) {
    case Axis::kPosX: return {1.0, 0.0, 0.0};
    case Axis::kNegX: return {-1.0, 0.0, 0.0};
    case Axis::kPosY: return {0.0, 1.0, 0.0};
    case Axis::kNegY: return {0.0, -1.0, 0.0};
    case Axis::kPosZ: return {0.0, 0.0, 1.0};
    case Axis::kNegZ: return {0.0, 0.0, -1.0};
  }
  return {0.0, 0.0, 0.0};
}

const char* fuse_rule_name(FuseRule rule) {
  switch (rule) {
    case FuseRule::kIntersection: return "intersection";
    case FuseRule::kMajority: return "majority";
    case FuseRule::kUnion: return "union";
  }
  return "?";
}

namespace {

// Cross-section coordinates per axis: +-X images (y,z), +-Y images (x,z),
// +-Z images (x,y).
void cross_axes(Axis a, int* i0, int* i1) {
  switch (a) {
    case Axis::kPosX:
    case Axis::kNegX: *i0 = 1; *i1 = 2; return;
    case Axis::kPosY:
    case Axis::kNegY: *i0 = 0; *i1 = 2; return;
    default: *i0 = 0; *i1 = 1; return;
  }
}

Ray pixel_ray(Axis a, int N, int u, int v) {
  double c0 = -0.5 + (u + 0.5) / N;
  double c1 = -0.5 + (v + 0.5) / N;
  Vec3 dir = axis_direction(a);
  Vec3 origin = -dir;  // start one unit behind the center plane
  int i0, i1;
  cross_axes(a, &i0, &i1);
  origin[i0] = c0;
  origin[i1] = c1;
  return {origin, dir};
}

void validate_stack(const DepthStack& st) {
  if (st.N < 1 || st.k < 1) throw OutOfRange("DepthStack: bad dimensions");
  if (st.depth.size() !=
      static_cast<std::size_t>(st.k) * st.N * st.N) {
    throw OutOfRange("DepthStack: depth size mismatch");
  }
  for (int u = 0; u < st.N; ++u) {
    for (int v = 0; v < st.N; ++v) {
      bool seen_invalid = false;
      float prev = 0.0f;
      for (int l = 0; l < st.k; ++l) {
        float d = st.at(l, u, v);
        if (d <= 0.0f) {
          if (d != kInvalidDepth) {
            throw OutOfRange("DepthStack: invalid sample not the -1 sentinel");
          }
          seen_invalid = true;
          continue;
        }
        if (seen_invalid) {
          throw OutOfRange("DepthStack: valid layer after invalid");
        }
        if (l > 0 && !(d > prev)) {
          throw OutOfRange("DepthStack: depths not strictly increasing");
        }
        prev = d;
      }
    }
  }
}

}  // namespace

NestedStacks encode_nested(const TriangleMesh& mesh, const NestedConfig& cfg) {
  if (cfg.N < 1 || cfg.k < 1) {
    throw OutOfRange("encode_nested: N and k must be >= 1");
  }
  Bvh bvh = build_bvh(mesh);
  NestedStacks out;
  out.source_hash = mesh_hash(mesh);
  std::size_t pixels = static_cast<std::size_t>(cfg.N) * cfg.N;
  for (int a = 0; a < 6; ++a) {
    DepthStack& st = out.stacks[a];
    st.axis = static_cast<Axis>(a);
    st.N = cfg.N;
    st.k = cfg.k;
    st.depth.assign(static_cast<std::size_t>(cfg.k) * pixels, kInvalidDepth);
    std::vector<std::uint8_t> truncated(pixels, 0);
    parallel_for(pixels, cfg.workers, [&](std::size_t pix) {
      int u = static_cast<int>(pix) / cfg.N;
      int v = static_cast<int>(pix) % cfg.N;
      Ray ray = pixel_ray(st.axis, cfg.N, u, v);
      std::uint64_t pixel_seed = splitmix64(
          cfg.seed + (static_cast<std::uint64_t>(a) * pixels + pix) *
                         0x9e3779b97f4a7c15ULL);
      HitList hl = intersect_all_with_retry(bvh, mesh, ray,
                                            cfg.parallel_cos_threshold,
                                            cfg.perturb_sigma, pixel_seed);
      std::size_t m = hl.hits.size();
      if (m > static_cast<std::size_t>(cfg.k)) truncated[pix] = 1;
      std::size_t fill = std::min<std::size_t>(m, cfg.k);
      for (std::size_t j = 0; j < fill; ++j) {  // nearest hits first
        st.depth[st.index(static_cast<int>(j), u, v)] =
            static_cast<float>(hl.hits[j].t);
      }
    });
    std::uint32_t count = 0;
    for (std::uint8_t t : truncated) count += t;
    out.truncated_pixels += count;
    validate_stack(st);
  }
  return out;
}

OccupancyGrid fuse_nested(const NestedStacks& stacks, int n_vox, FuseRule rule,
                          int workers) {
  int N = stacks.stacks[0].N;
  int k = stacks.stacks[0].k;
  for (int a = 0; a < 6; ++a) {
    const DepthStack& st = stacks.stacks[a];
    if (st.axis != static_cast<Axis>(a) || st.N != N || st.k != k) {
      throw StackMismatch("fuse_nested: inconsistent stacks");
    }
    validate_stack(st);
  }
  int need = rule == FuseRule::kIntersection ? 6
             : rule == FuseRule::kMajority   ? 4
                                             : 1;
  OccupancyGrid grid(n_vox);
  parallel_for(static_cast<std::size_t>(n_vox), workers, [&](std::size_t iz) {
    for (int iy = 0; iy < n_vox; ++iy) {
      for (int ix = 0; ix < n_vox; ++ix) {
        Vec3 p = grid.center(ix, iy, static_cast<int>(iz));
        int votes = 0;
        for (int a = 0; a < 6; ++a) {
          const DepthStack& st = stacks.stacks[a];
          int i0, i1;
          cross_axes(st.axis, &i0, &i1);
          double c0 = p[i0], c1 = p[i1];
          if (c0 < -0.5 || c0 > 0.5 || c1 < -0.5 || c1 > 0.5) continue;
          int u = std::min(N - 1, static_cast<int>((c0 + 0.5) * N));
          int v = std::min(N - 1, static_cast<int>((c1 + 0.5) * N));
          double t = 1.0 + dot(p, axis_direction(st.axis));
          int m = st.count_valid(u, v);
          for (int j = 0; j + 1 < m; j += 2) {
            if (st.at(j, u, v) <= t && t <= st.at(j + 1, u, v)) {
              ++votes;
              break;
            }
          }
        }
        if (votes >= need) grid.occ[grid.index(ix, iy, static_cast<int>(iz))] = 1;
      }
    }
  });
  return grid;
}

TriangleMesh reconstruct_nested(const NestedStacks& stacks, int n_vox,
                                FuseRule rule, int workers) {
  return marching_cubes(fuse_nested(stacks, n_vox, rule, workers));
}

namespace {

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::size_t spn_file_size(int N, int k) {
  std::size_t n = static_cast<std::size_t>(N) * N * k;
  return 32 + 6 * (1 + 4 * n + (n + 7) / 8);
}

std::vector<std::uint8_t> spn_bytes(const NestedStacks& stacks) {
  int N = stacks.stacks[0].N;
  int k = stacks.stacks[0].k;
  std::vector<std::uint8_t> b;
  b.reserve(spn_file_size(N, k));
  b.push_back('S');
  b.push_back('P');
  b.push_back('N');
  b.push_back('1');
  b.push_back(0x01);
  b.push_back(0x01);  // depth channel only
  put_u16(b, 1);
  put_u32(b, static_cast<std::uint32_t>(N));
  put_u32(b, static_cast<std::uint32_t>(N));
  put_u32(b, static_cast<std::uint32_t>(k));
  put_u32(b, stacks.truncated_pixels);
  put_u64(b, stacks.source_hash);
  std::size_t n = static_cast<std::size_t>(N) * N * k;
  for (int a = 0; a < 6; ++a) {
    const DepthStack& st = stacks.stacks[a];
    validate_stack(st);
    if (st.N != N || st.k != k || st.axis != static_cast<Axis>(a)) {
      throw StackMismatch("spn_bytes: inconsistent stacks");
    }
    b.push_back(static_cast<std::uint8_t>(a));
    std::size_t base = b.size();
    b.resize(base + 4 * n);
    std::memcpy(b.data() + base, st.depth.data(), 4 * n);
    std::size_t mask_base = b.size();
    b.resize(mask_base + (n + 7) / 8, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (st.depth[i] > 0.0f) {
        b[mask_base + i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
      }
    }
  }
  return b;
}

void write_spn(const std::string& path, const NestedStacks& stacks) {
  std::vector<std::uint8_t> b = spn_bytes(stacks);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for write");
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
  if (!out) throw IoError(path + ": write failed");
}

NestedStacks read_spn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path + ": cannot open");
  std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
  if (b.size() < 32) throw BadMagic(path + ": shorter than header");
  if (std::memcmp(b.data(), "SPN1", 4) != 0) {
    throw BadMagic(path + ": bad magic");
  }
  if (b[4] != 0x01) throw BadMagic(path + ": unknown endian tag");
  if (!(b[5] & 0x01)) throw HeaderMismatch(path + ": depth channel missing");
  std::uint32_t H = get_u32(b.data() + 8);
  std::uint32_t W = get_u32(b.data() + 12);
  std::uint32_t k = get_u32(b.data() + 16);
  if (H != W || H < 1 || H > (1u << 16) || k < 1 || k > 4096) {
    throw HeaderMismatch(path + ": implausible dimensions");
  }
  int N = static_cast<int>(H);
  (void)get_u16(b.data() + 6);
  NestedStacks out;
  out.truncated_pixels = get_u32(b.data() + 20);
  out.source_hash = get_u64(b.data() + 24);
  if (b.size() != spn_file_size(N, static_cast<int>(k))) {
    throw HeaderMismatch(path + ": size " + std::to_string(b.size()) +
                         " != expected " +
                         std::to_string(spn_file_size(N, static_cast<int>(k))));
  }
  std::size_t n = static_cast<std::size_t>(N) * N * k;
  std::size_t off = 32;
  for (int a = 0; a < 6; ++a) {
    if (b[off] != static_cast<std::uint8_t>(a)) {
      throw HeaderMismatch(path + ": unexpected axis tag");
    }
    ++off;
    DepthStack& st = out.stacks[a];
    st.axis = static_cast<Axis>(a);
    st.N = N;
    st.k = static_cast<int>(k);
    st.depth.resize(n);
    std::memcpy(st.depth.data(), b.data() + off, 4 * n);
    off += 4 * n;
    const std::uint8_t* mask = b.data() + off;
    for (std::size_t i = 0; i < n; ++i) {
      bool bit = (mask[i / 8] >> (i % 8)) & 1u;
      if (bit != (st.depth[i] > 0.0f)) {
        throw HeaderMismatch(path + ": validity mask disagrees with sentinels");
      }
    }
    off += (n + 7) / 8;
    validate_stack(st);
  }
  return out;
}

}  // namespace spmap
