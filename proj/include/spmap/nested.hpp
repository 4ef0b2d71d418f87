#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spmap/decode.hpp"
#include "spmap/mesh.hpp"
#include "spmap/sp_map.hpp"

namespace spmap {

// View axes for the orthographic nested-depth baseline.
enum class Axis : std::uint8_t {
  kPosX = 0,
  kNegX = 1,
  kPosY = 2,
  kNegY = 3,
  kPosZ = 4,
  kNegZ = 5,
};

const char* axis_name(Axis a);
Vec3 axis_direction(Axis a);

// One orthographic multi-layer depth image: N x N pixels over the
// [-0.5, 0.5]^2 cross-section, rays start at axis coordinate -1 (toward the
// axis direction), depth = distance along the ray.  Layer j holds the j-th
// nearest hit; per pixel depths are strictly increasing and front-packed,
// kInvalidDepth marks absent layers.
struct DepthStack {
  Axis axis = Axis::kPosX;
  int N = 0;
  int k = 0;
  std::vector<float> depth;  // layer-major: layer * N*N + u * N + v

  std::size_t index(int layer, int u, int v) const {
    return (static_cast<std::size_t>(layer) * N + u) * N + v;
  }
  float at(int layer, int u, int v) const { return depth[index(layer, u, v)]; }
  bool valid(int layer, int u, int v) const { return at(layer, u, v) > 0.0f; }
  int count_valid(int u, int v) const {
    int n = 0;
    while (n < k && valid(n, u, v)) ++n;
    return n;
  }
};

struct NestedStacks {
  std::array<DepthStack, 6> stacks;
  std::uint32_t truncated_pixels = 0;  // summed over all six views
  std::uint64_t source_hash = 0;
};

struct NestedConfig {
  int N = 256;
  int k = 4;
  double parallel_cos_threshold = 1e-4;
  double perturb_sigma = 1e-5;
  std::uint64_t seed = 0;
  int workers = 1;
};

enum class FuseRule { kIntersection, kMajority, kUnion };

const char* fuse_rule_name(FuseRule rule);

NestedStacks encode_nested(const TriangleMesh& mesh, const NestedConfig& cfg);

// A voxel center votes "inside" on an axis when its depth along that axis
// falls within an entry-exit pair of consecutive valid layers; cross
// coordinates outside the [-0.5, 0.5]^2 window never vote.  Occupied iff the
// vote count passes the rule (intersection 6, majority >= 4, union >= 1).
OccupancyGrid fuse_nested(const NestedStacks& stacks, int n_vox,
                          FuseRule rule = FuseRule::kMajority, int workers = 1);

TriangleMesh reconstruct_nested(const NestedStacks& stacks, int n_vox,
                                FuseRule rule = FuseRule::kMajority,
                                int workers = 1);

// Single-file container: the 32-byte header of the SPM format with magic
// "SPN1" and H = W = N, followed by six blocks of (1-byte axis tag, f32
// depths layer-major, LSB-first packed validity bits).
std::vector<std::uint8_t> spn_bytes(const NestedStacks& stacks);
void write_spn(const std::string& path, const NestedStacks& stacks);
NestedStacks read_spn(const std::string& path);
std::size_t spn_file_size(int N, int k);

}  // namespace spmap
