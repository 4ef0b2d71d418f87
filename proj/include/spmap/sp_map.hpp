#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spmap/sp_grid.hpp"

namespace spmap {

inline constexpr float kInvalidDepth = -1.0f;
inline constexpr double kMaxDepth = 0.8660254037844387;  // sqrt(3)/2

// Multi-layer equirectangular depth map. Storage is layer-major, row-major:
// sample (l, r, c) at index (l*H + r)*W + c. Invalid samples hold -1.0f.
// Invariants (checked by validate_spmap):
//   - valid layers are front-packed per pixel
//   - valid depths strictly decrease with layer index (layer 0 outermost)
//   - valid depths lie in (0, sqrt(3)/2 + 1e-6]
struct SpMap {
  SphericalGrid grid;
  int k = 0;
  std::vector<float> depth;     // k*H*W
  std::vector<float> normals;   // empty or 3*k*H*W, unit, opposing the ray
  std::uint32_t truncated_pixels = 0;
  std::uint64_t source_hash = 0;
  std::uint16_t version = 1;

  SpMap() = default;
  SpMap(const SphericalGrid& g, int layers)
      : grid(g), k(layers),
        depth(static_cast<std::size_t>(layers) * g.pixel_count(),
              kInvalidDepth) {
    if (layers < 1) throw OutOfRange("SpMap: k must be >= 1");
  }

  std::size_t index(int l, int r, int c) const {
    return (static_cast<std::size_t>(l) * grid.H + r) * grid.W + c;
  }
  float at(int l, int r, int c) const { return depth[index(l, r, c)]; }
  float& at(int l, int r, int c) { return depth[index(l, r, c)]; }
  bool valid(int l, int r, int c) const { return at(l, r, c) > 0.0f; }

  int count_valid(int r, int c) const {
    int n = 0;
    while (n < k && valid(n, r, c)) ++n;
    return n;
  }

  bool has_normals() const { return !normals.empty(); }
  std::size_t sample_count() const {
    return static_cast<std::size_t>(k) * grid.pixel_count();
  }
};

// Throws (OutOfRange) when any SpMap invariant is violated.
void validate_spmap(const SpMap& map);

// One layer as a dense double image; invalid samples become `fill`.
struct Image {
  int h = 0, w = 0;
  std::vector<double> v;

  Image() = default;
  Image(int h_, int w_, double init = 0.0)
      : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, init) {}
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * w + c]; }
  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * w + c]; }
};

Image layer_image(const SpMap& map, int layer, double fill = -1.0);

// Pad columns by azimuth wrap and rows by edge clamp: output is
// k x (H+2*pad) x (W+2*pad), depths bit-identical to their sources.
struct PaddedMap {
  SphericalGrid grid;  // original dims
  int k = 0;
  int pad = 0;
  std::vector<float> depth;  // k*(H+2p)*(W+2p)

  int ph() const { return grid.H + 2 * pad; }
  int pw() const { return grid.W + 2 * pad; }
  float at(int l, int pr, int pc) const {
    return depth[(static_cast<std::size_t>(l) * ph() + pr) * pw() + pc];
  }
};

PaddedMap circular_pad(const SpMap& map, int pad);

// Same padding for a single double image (used by the Sobel mask and FFT
// preprocessing); wrap in columns, clamp in rows.
Image circular_pad(const Image& img, int pad);

// SPM container, little-endian:
//   0  magic "SPM1"                  4 bytes
//   4  endian tag 0x01               1
//   5  channel flags (bit0 depth, bit1 normals)  1
//   6  version (u16)                 2
//   8  H, W, k (u32 each)            12
//  20  truncated pixel count (u32)   4
//  24  source mesh hash (u64)        8
//  32  depth payload: k*H*W f32, layer-major, row-major
//      validity bitmask: one bit per sample in the same order, LSB first,
//      zero-padded to a whole byte
//      normals payload (flag bit1): 3*k*H*W f32
void write_spm(const SpMap& map, const std::string& path);
SpMap read_spm(const std::string& path);

// Exact on-disk size of a map with the given shape.
std::uint64_t spm_file_size(int H, int W, int k, bool with_normals);

// Serialization to an in-memory buffer (write_spm writes exactly this).
std::vector<unsigned char> spm_bytes(const SpMap& map);

}  // namespace spmap
