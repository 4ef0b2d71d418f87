#include "spmap/winding.hpp"

#include <cmath>

#include "spmap/sp_grid.hpp"

namespace spmap {
namespace {

double solid_angle(const Vec3& va, const Vec3& vb, const Vec3& vc, const Vec3& q) {
  Vec3 a = va - q, b = vb - q, c = vc - q;
  double la = norm(a), lb = norm(b), lc = norm(c);
  double det = dot(a, cross(b, c));
  double den = la * lb * lc + dot(a, b) * lc + dot(b, c) * la + dot(c, a) * lb;
  return 2.0 * std::atan2(det, den);
}

}  // namespace

double winding_number_exact(const TriangleMesh& mesh, const Vec3& q) {
  double omega = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    omega += solid_angle(mesh.face_vertex(f, 0), mesh.face_vertex(f, 1),
                         mesh.face_vertex(f, 2), q);
  }
  return omega / (4.0 * kPi);
}

FastWinding::FastWinding(const TriangleMesh& mesh, const Bvh& bvh, double beta)
    : mesh_(mesh), bvh_(bvh), beta_(beta) {
  data_.resize(bvh.nodes.size());
  // Children precede nothing in the node array ordering guarantee, so
  // compute bottom-up by explicit recursion.
  struct Builder {
    const TriangleMesh& mesh;
    const Bvh& bvh;
    std::vector<NodeData>& data;

    void run(std::int32_t id) {
      const Bvh::Node& n = bvh.nodes[id];
      NodeData& d = data[id];
      if (n.leaf()) {
        double total_area = 0.0;
        Vec3 weighted_centroid{0, 0, 0};
        for (std::uint32_t i = 0; i < n.count; ++i) {
          std::uint32_t f = bvh.prims[n.first + i];
          Vec3 sn = face_normal_scaled(mesh, f);  // length = 2*area
          double area = 0.5 * norm(sn);
          d.area_normal += sn * 0.5;
          Vec3 c = (mesh.face_vertex(f, 0) + mesh.face_vertex(f, 1) +
                    mesh.face_vertex(f, 2)) / 3.0;
          weighted_centroid += c * area;
          total_area += area;
        }
        d.centroid = total_area > 0.0 ? weighted_centroid / total_area
                                      : n.box.center();
      } else {
        run(n.left);
        run(n.right);
        const NodeData& l = data[n.left];
        const NodeData& r = data[n.right];
        d.area_normal = l.area_normal + r.area_normal;
        double wl = norm(l.area_normal) + 1e-300, wr = norm(r.area_normal) + 1e-300;
        // Centroid blend by child dipole strength keeps the far-field
        // approximation stable for thin sheets; box center fallback is fine
        // because the radius below bounds the true support either way.
        d.centroid = (l.centroid * wl + r.centroid * wr) / (wl + wr);
      }
      double rad = 0.0;
      for (std::uint32_t i = 0; i < n.count; ++i) {
        std::uint32_t f = bvh.prims[n.first + i];
        for (int corner = 0; corner < 3; ++corner) {
          rad = std::fmax(rad, norm(mesh.face_vertex(f, corner) - d.centroid));
        }
      }
      if (!n.leaf()) {
        // Bound via children radii and centroid offsets.
        rad = std::fmax(norm(data[n.left].centroid - d.centroid) + data[n.left].radius,
                        norm(data[n.right].centroid - d.centroid) + data[n.right].radius);
      }
      d.radius = rad;
    }
  };
  Builder{mesh, bvh, data_}.run(0);
}

double FastWinding::eval_node(std::int32_t id, const Vec3& q) const {
  const Bvh::Node& n = bvh_.nodes[id];
  const NodeData& d = data_[id];
  Vec3 r = d.centroid - q;
  double dist = norm(r);
  if (dist > beta_ * d.radius && dist > 0.0) {
    return dot(d.area_normal, r) / (4.0 * kPi * dist * dist * dist);
  }
  if (n.leaf()) {
    double omega = 0.0;
    for (std::uint32_t i = 0; i < n.count; ++i) {
      std::uint32_t f = bvh_.prims[n.first + i];
      omega += solid_angle(mesh_.face_vertex(f, 0), mesh_.face_vertex(f, 1),
                           mesh_.face_vertex(f, 2), q);
    }
    return omega / (4.0 * kPi);
  }
  return eval_node(n.left, q) + eval_node(n.right, q);
}

double FastWinding::eval(const Vec3& q) const { return eval_node(0, q); }

}  // namespace spmap
