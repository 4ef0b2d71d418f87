#pragma once

#include <cmath>
#include <utility>

#include "spmap/errors.hpp"
#include "spmap/vec.hpp"

namespace spmap {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Equirectangular parameterization. theta (azimuth) spans [-pi/2, 3pi/2),
// phi (polar) spans [0, pi); samples sit at pixel centers:
//   phi(r) = (r + 0.5) * pi / H,  theta(c) = -pi/2 + (c + 0.5) * 2pi / W.
struct SphericalGrid {
  int H = 0;
  int W = 0;

  SphericalGrid() = default;
  SphericalGrid(int h, int w) : H(h), W(w) {
    if (h < 2 || w < 4) {
      throw OutOfRange("SphericalGrid: need H >= 2, W >= 4, got " +
                       std::to_string(h) + "x" + std::to_string(w));
    }
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(H) * static_cast<std::size_t>(W);
  }
  bool operator==(const SphericalGrid& o) const { return H == o.H && W == o.W; }
};

// (theta, phi) at the center of pixel (r, c). Throws OutOfRange off-grid.
inline std::pair<double, double> pixel_to_angles(const SphericalGrid& g, int r,
                                                 int c) {
  if (r < 0 || r >= g.H || c < 0 || c >= g.W) {
    throw OutOfRange("pixel_to_angles: (" + std::to_string(r) + "," +
                     std::to_string(c) + ") outside " + std::to_string(g.H) +
                     "x" + std::to_string(g.W));
  }
  double phi = (r + 0.5) * kPi / g.H;
  double theta = -0.5 * kPi + (c + 0.5) * 2.0 * kPi / g.W;
  return {theta, phi};
}

// Pixel containing the angle pair; azimuth wraps, polar clamps.
inline std::pair<int, int> angles_to_pixel(const SphericalGrid& g, double theta,
                                           double phi) {
  int r = static_cast<int>(std::floor(phi / kPi * g.H));
  if (r < 0) r = 0;
  if (r >= g.H) r = g.H - 1;
  double u = (theta + 0.5 * kPi) / (2.0 * kPi);
  int c = static_cast<int>(std::floor(u * g.W));
  c %= g.W;
  if (c < 0) c += g.W;
  return {r, c};
}

// Unit direction for (theta, phi): (sin phi cos theta, sin phi sin theta,
// cos phi). The depth-d point along it is the unprojection.
inline Vec3 sphere_dir(double theta, double phi) {
  double s = std::sin(phi);
  return {s * std::cos(theta), s * std::sin(theta), std::cos(phi)};
}

inline Vec3 unproject(double theta, double phi, double d) {
  if (!(d > 0.0)) {
    throw NonPositiveDepth("unproject: d = " + std::to_string(d));
  }
  return sphere_dir(theta, phi) * d;
}

struct SphericalCoords {
  double theta = 0.0;
  double phi = 0.0;
  double d = 0.0;
};

// Inverse of unproject. theta wraps into [-pi/2, 3pi/2); at the poles
// (sin phi < 1e-12) theta is canonically 0.
inline SphericalCoords project(const Vec3& p) {
  double d = norm(p);
  if (d == 0.0) throw OriginPoint("project: origin has no direction");
  double cz = p.z / d;
  if (cz > 1.0) cz = 1.0;
  if (cz < -1.0) cz = -1.0;
  double phi = std::acos(cz);
  double theta;
  if (std::hypot(p.x, p.y) / d < 1e-12) {
    theta = 0.0;
  } else {
    theta = std::atan2(p.y, p.x);
    if (theta < -0.5 * kPi) theta += 2.0 * kPi;
    if (theta >= 1.5 * kPi) theta -= 2.0 * kPi;
  }
  return {theta, phi, d};
}

}  // namespace spmap
