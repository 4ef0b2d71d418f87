#pragma once

#include <cstdint>
#include <vector>

#include "spmap/vec.hpp"

namespace spmap {

// Exact nearest-neighbor search over a fixed point set (3D kd-tree,
// longest-axis median split, leaf size 8).
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);

  std::size_t size() const { return pts_.size(); }

  // Index (into the constructor's vector) and squared distance of the
  // nearest point to q. Tree must be non-empty.
  std::pair<std::uint32_t, double> nearest(const Vec3& q) const;
  double nearest_dist(const Vec3& q) const;

 private:
  struct Node {
    double split = 0.0;
    int axis = -1;            // -1 marks a leaf
    std::int32_t left = -1, right = -1;
    std::uint32_t first = 0, count = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& q, double& best_d2,
              std::uint32_t& best_i) const;

  std::vector<Vec3> pts_;           // permuted
  std::vector<std::uint32_t> ids_;  // original index per permuted slot
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace spmap
