#pragma once

#include <cstdint>
#include <vector>

#include "spmap/mesh.hpp"
#include "spmap/raycast.hpp"
#include "spmap/sp_map.hpp"

namespace spmap {

struct EncodeConfig {
  SphericalGrid grid{256, 512};
  int k = 4;
  double parallel_cos_threshold = kDefaultParallelCos;
  double perturb_sigma = kDefaultPerturbSigma;
  bool store_normals = false;
  std::uint64_t seed = 0;
  int workers = 1;
};

// Algorithm: one center-out ray per pixel, all hits ascending, then layers
// fill from the outermost hit inward; more than k hits keeps the k outermost
// and counts the pixel as truncated. Throws UnnormalizedMesh when any vertex
// leaves the radius sqrt(3)/2 sphere, EmptyMesh on zero faces.
SpMap encode(const TriangleMesh& mesh, const EncodeConfig& cfg);

// Fraction of n_samples area-weighted surface points whose nearest decoded
// map point lies within tol. 0 for maps with no valid samples.
double coverage(const TriangleMesh& mesh, const SpMap& map,
                std::size_t n_samples, double tol,
                std::uint64_t seed = 0x5eed);

// counts[m] = pixels with exactly m valid layers; sums to H*W.
std::vector<std::size_t> layer_histogram(const SpMap& map);

}  // namespace spmap
