#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "spmap/mesh.hpp"
#include "spmap/sp_map.hpp"

namespace spmap {

// Aabb center to origin, longest axis to [-1, 1] (evaluation frame).
void normalize_unit(TriangleMesh& mesh);

// Symmetric mean of point-to-set L2 nearest-neighbor distances, halved:
// (mean_a min_b |a-b| + mean_b min_a |b-a|) / 2. Report headers state this
// convention; values are comparable only within this tool.
double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

// Harmonic mean of precision/recall at distance tau, in percent.
double f_score(const std::vector<Vec3>& a, const std::vector<Vec3>& b,
               double tau = 0.1);

// Winding-number voxelization of both meshes on the same N^3 grid over
// [-1,1]^3; |A and B| / |A or B|. Throws NonWatertight when more than 1% of
// either mesh's winding numbers land further than 0.25 from an integer.
double volume_iou(const TriangleMesh& a, const TriangleMesh& b, int N = 64,
                  int workers = 1);

struct Rotation {
  int id = 0;
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  Vec3 apply(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }
};

// The 24 rotations of the octahedral group; id 0 is the identity.
const std::vector<Rotation>& octahedral_rotations();

struct AlignResult {
  Rotation rotation;
  double chamfer = 0.0;
};

// Brute-force rotation search: both meshes normalized to [-1,1], pred
// rotated by each candidate, lowest chamfer wins (ties to the lowest id, and
// the identity is always a candidate). refine_azimuth adds a 15-degree-step
// z-rotation scan composed with the best octahedral element.
AlignResult align_rotation(const TriangleMesh& pred, const TriangleMesh& gt,
                           std::size_t samples = 10000,
                           std::uint64_t seed = 0x5eed,
                           bool refine_azimuth = false);

enum class Region { kSeam, kPolar, kEquator, kAll };

// Mean over co-valid samples in the region of |d_map - d_ref| / d_ref.
// Seam: first/last 2 columns; polar: top/bottom 15% of rows; equator:
// middle 30% of rows. NaN when the region has no co-valid samples.
double regional_abs_rel(const SpMap& map, const SpMap& ref, Region region);

enum class StorageMode { kRaw, kDeflated };

// Raw: exact container size in bytes. Deflated: zlib deflate level 6.
std::uint64_t storage_bytes(const SpMap& map, StorageMode mode);
std::uint64_t deflated_size(const std::vector<unsigned char>& bytes);

}  // namespace spmap
