#include "spmap/kdtree.hpp"

#include <algorithm>
#include <cmath>

#include "spmap/errors.hpp"
#include "spmap/mesh.hpp"

namespace spmap {

KdTree::KdTree(std::vector<Vec3> points) : pts_(std::move(points)) {
  ids_.resize(pts_.size());
  for (std::uint32_t i = 0; i < ids_.size(); ++i) ids_[i] = i;
  if (!pts_.empty()) {
    nodes_.reserve(2 * pts_.size() / 8 + 4);
    root_ = static_cast<std::int32_t>(build(0, static_cast<std::uint32_t>(pts_.size())));
  }
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  std::uint32_t count = end - begin;
  if (count <= 8) {
    nodes_[id].first = begin;
    nodes_[id].count = count;
    return id;
  }
  Aabb box;
  for (std::uint32_t i = begin; i < end; ++i) box.expand(pts_[i]);
  Vec3 ext = box.extent();
  int axis = 0;
  if (ext.y > ext.x) axis = 1;
  if (ext.z > ext[axis]) axis = 2;
  std::uint32_t mid = begin + count / 2;
  auto pb = pts_.begin();
  std::vector<std::uint32_t> order(count);
  for (std::uint32_t i = 0; i < count; ++i) order[i] = begin + i;
  std::nth_element(order.begin(), order.begin() + (mid - begin), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     double pa = pb[a][axis], pc = pb[b][axis];
                     if (pa != pc) return pa < pc;
                     return ids_[a] < ids_[b];
                   });
  // Apply the permutation to both parallel arrays.
  std::vector<Vec3> tmp_p(count);
  std::vector<std::uint32_t> tmp_i(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    tmp_p[i] = pts_[order[i]];
    tmp_i[i] = ids_[order[i]];
  }
  std::copy(tmp_p.begin(), tmp_p.end(), pts_.begin() + begin);
  std::copy(tmp_i.begin(), tmp_i.end(), ids_.begin() + begin);

  nodes_[id].axis = axis;
  nodes_[id].split = pts_[mid][axis];
  std::uint32_t l = build(begin, mid);
  std::uint32_t r = build(mid, end);
  nodes_[id].left = static_cast<std::int32_t>(l);
  nodes_[id].right = static_cast<std::int32_t>(r);
  return id;
}

void KdTree::search(std::int32_t node, const Vec3& q, double& best_d2,
                    std::uint32_t& best_i) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
      double d2 = norm2(pts_[i] - q);
      if (d2 < best_d2 || (d2 == best_d2 && ids_[i] < best_i)) {
        best_d2 = d2;
        best_i = ids_[i];
      }
    }
    return;
  }
  double delta = q[n.axis] - n.split;
  std::int32_t near = delta < 0.0 ? n.left : n.right;
  std::int32_t far = delta < 0.0 ? n.right : n.left;
  search(near, q, best_d2, best_i);
  if (delta * delta <= best_d2) search(far, q, best_d2, best_i);
}

std::pair<std::uint32_t, double> KdTree::nearest(const Vec3& q) const {
  if (pts_.empty()) throw EmptySet("KdTree::nearest on empty set");
  double best_d2 = 1e300;
  std::uint32_t best_i = 0xffffffffu;
  search(root_, q, best_d2, best_i);
  return {best_i, best_d2};
}

double KdTree::nearest_dist(const Vec3& q) const {
  return std::sqrt(nearest(q).second);
}

}  // namespace spmap
