#pragma once

#include <vector>

#include "spmap/mesh.hpp"
#include "spmap/raycast.hpp"

namespace spmap {

// Generalized winding number of q with respect to the mesh surface
// (sum of signed solid angles / 4pi, van Oosterom-Strackee per triangle).
// +1 inside a closed outward-oriented surface, 0 outside; integers for any
// nesting/orientation combination when the mesh is watertight.
double winding_number_exact(const TriangleMesh& mesh, const Vec3& q);

// First-order dipole approximation over the BVH: a node whose bounding
// radius r satisfies |q - c| > beta * r contributes
// dot(sum_i a_i n_i, c - q) / (4pi |c - q|^3); otherwise recurse, exact sums
// at the leaves. Shares the raycast BVH topology.
class FastWinding {
 public:
  FastWinding(const TriangleMesh& mesh, const Bvh& bvh, double beta = 2.0);

  double eval(const Vec3& q) const;

 private:
  struct NodeData {
    Vec3 area_normal;  // sum of area-weighted unit normals
    Vec3 centroid;     // area-weighted triangle centroid
    double radius = 0.0;
  };

  double eval_node(std::int32_t node, const Vec3& q) const;

  const TriangleMesh& mesh_;
  const Bvh& bvh_;
  double beta_;
  std::vector<NodeData> data_;
};

// Inside test that tolerates flipped or nested components: odd |round(w)|.
inline bool winding_inside(double w) {
  long long r = static_cast<long long>(std::llround(w));
  return (r < 0 ? -r : r) % 2 == 1;
}

}  // namespace spmap
