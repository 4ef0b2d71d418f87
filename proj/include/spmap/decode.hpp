#pragma once

#include <cstdint>
#include <vector>

#include "spmap/mesh.hpp"
#include "spmap/sp_map.hpp"

namespace spmap {

struct OrientedPointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // unit, oriented against the viewing ray
  std::vector<int> layer_of;
};

// One point per valid sample. Normals come from the normal channel when
// present, otherwise from the grid tangent plane (central differences over
// r and c in the same layer, azimuth-wrapping); isolated samples fall back
// to the radial direction. Throws EmptyMap when nothing is valid.
OrientedPointCloud unproject_map(const SpMap& map);

// Cubical domain [-half, half]^3, half = 0.5*N/(N-4): the unit-box mesh
// keeps an exact 2-voxel empty margin so extracted surfaces never touch the
// lattice boundary.
struct OccupancyGrid {
  int n = 0;
  double half = 0.0;
  std::vector<std::uint8_t> occ;  // x-fastest: (iz*n + iy)*n + ix

  OccupancyGrid() = default;
  explicit OccupancyGrid(int N);

  double voxel_size() const { return 2.0 * half / n; }
  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(iz) * n + iy) * n + ix;
  }
  Vec3 center(int ix, int iy, int iz) const {
    double vs = voxel_size();
    return {-half + (ix + 0.5) * vs, -half + (iy + 0.5) * vs,
            -half + (iz + 0.5) * vs};
  }
  std::size_t occupied_count() const;
};

// Radial parity fusion: voxel occupied iff an odd number of valid layer
// depths at its pixel exceed the voxel radius. Requires a zero-truncation
// map from a watertight mesh; throws TruncatedMap otherwise.
OccupancyGrid occupancy_from_map(const SpMap& map, int N, int workers = 1);

// 0.5-level surface of the 3^3 box-filtered occupancy, 256-case table with
// a fixed ambiguous-face rule, outward orientation, welded vertices.
// Output is closed and 2-manifold. Throws EmptyGrid when the filtered field
// crosses the level nowhere (empty grid, or features under filter support).
TriangleMesh marching_cubes(const OccupancyGrid& grid);

// Per-layer triangulation of 4-neighboring valid pixels (seam-wrapping).
// A quad is emitted only when all four of its edges have |d1 - d0|
// strictly below the tolerance; full valid pole rings become pole fans.
// discontinuity_tol < 0 selects 4*(2pi/W)*median(valid depth).
TriangleMesh grid_triangulate(const SpMap& map, double discontinuity_tol = -1.0);

}  // namespace spmap
