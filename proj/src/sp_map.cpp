#include "spmap/sp_map.hpp"

#include <cstring>
#include <fstream>

#include "spmap/util.hpp"

namespace spmap {

void validate_spmap(const SpMap& map) {
  if (map.k < 1) throw OutOfRange("SpMap: k < 1");
  if (map.depth.size() != map.sample_count()) {
    throw OutOfRange("SpMap: depth size mismatch");
  }
  if (map.has_normals() && map.normals.size() != 3 * map.sample_count()) {
    throw OutOfRange("SpMap: normals size mismatch");
  }
  for (int r = 0; r < map.grid.H; ++r) {
    for (int c = 0; c < map.grid.W; ++c) {
      bool seen_invalid = false;
      float prev = 0.0f;
      for (int l = 0; l < map.k; ++l) {
        float d = map.at(l, r, c);
        if (d <= 0.0f) {
          if (d != kInvalidDepth) {
            throw OutOfRange("SpMap: invalid sample not the -1 sentinel");
          }
          seen_invalid = true;
          continue;
        }
        if (seen_invalid) throw OutOfRange("SpMap: valid layer after invalid");
        if (d > static_cast<float>(kMaxDepth) + 1e-6f) {
          throw OutOfRange("SpMap: depth exceeds sqrt(3)/2");
        }
        if (l > 0 && !(d < prev)) {
          throw OutOfRange("SpMap: depths not strictly decreasing");
        }
        prev = d;
      }
    }
  }
}

Image layer_image(const SpMap& map, int layer, double fill) {
  if (layer < 0 || layer >= map.k) throw OutOfRange("layer_image: bad layer");
  Image img(map.grid.H, map.grid.W);
  for (int r = 0; r < map.grid.H; ++r) {
    for (int c = 0; c < map.grid.W; ++c) {
      float d = map.at(layer, r, c);
      img.at(r, c) = d > 0.0f ? static_cast<double>(d) : fill;
    }
  }
  return img;
}

PaddedMap circular_pad(const SpMap& map, int pad) {
  if (pad < 0 || pad >= map.grid.W) {
    throw PadTooLarge("circular_pad: pad " + std::to_string(pad) +
                      " not in [0, W)");
  }
  PaddedMap out;
  out.grid = map.grid;
  out.k = map.k;
  out.pad = pad;
  int ph = out.ph(), pw = out.pw();
  out.depth.resize(static_cast<std::size_t>(map.k) * ph * pw);
  for (int l = 0; l < map.k; ++l) {
    for (int pr = 0; pr < ph; ++pr) {
      int r = pr - pad;
      if (r < 0) r = 0;
      if (r >= map.grid.H) r = map.grid.H - 1;
      for (int pc = 0; pc < pw; ++pc) {
        int c = (pc - pad) % map.grid.W;
        if (c < 0) c += map.grid.W;
        out.depth[(static_cast<std::size_t>(l) * ph + pr) * pw + pc] =
            map.at(l, r, c);
      }
    }
  }
  return out;
}

Image circular_pad(const Image& img, int pad) {
  if (pad < 0 || pad >= img.w) {
    throw PadTooLarge("circular_pad: pad " + std::to_string(pad) +
                      " not in [0, w)");
  }
  Image out(img.h + 2 * pad, img.w + 2 * pad);
  for (int pr = 0; pr < out.h; ++pr) {
    int r = pr - pad;
    if (r < 0) r = 0;
    if (r >= img.h) r = img.h - 1;
    for (int pc = 0; pc < out.w; ++pc) {
      int c = (pc - pad) % img.w;
      if (c < 0) c += img.w;
      out.at(pr, pc) = img.at(r, c);
    }
  }
  return out;
}

namespace {

void put_u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v & 0xff));
  b.push_back(static_cast<unsigned char>(v >> 8));
}
void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
void put_u64(std::vector<unsigned char>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::uint64_t spm_file_size(int H, int W, int k, bool with_normals) {
  std::uint64_t n = static_cast<std::uint64_t>(H) * W * k;
  std::uint64_t size = 32 + 4 * n + (n + 7) / 8;
  if (with_normals) size += 12 * n;
  return size;
}

std::vector<unsigned char> spm_bytes(const SpMap& map) {
  validate_spmap(map);
  std::vector<unsigned char> b;
  std::size_t n = map.sample_count();
  b.reserve(spm_file_size(map.grid.H, map.grid.W, map.k, map.has_normals()));
  b.insert(b.end(), {'S', 'P', 'M', '1'});
  b.push_back(0x01);
  b.push_back(static_cast<unsigned char>(0x01 | (map.has_normals() ? 0x02 : 0)));
  put_u16(b, map.version);
  put_u32(b, static_cast<std::uint32_t>(map.grid.H));
  put_u32(b, static_cast<std::uint32_t>(map.grid.W));
  put_u32(b, static_cast<std::uint32_t>(map.k));
  put_u32(b, map.truncated_pixels);
  put_u64(b, map.source_hash);

  // This sandbox is little-endian; floats are memcpy'd as-is.
  std::size_t base = b.size();
  b.resize(base + 4 * n);
  std::memcpy(b.data() + base, map.depth.data(), 4 * n);

  std::size_t mask_base = b.size();
  b.resize(mask_base + (n + 7) / 8, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (map.depth[i] > 0.0f) b[mask_base + i / 8] |= static_cast<unsigned char>(1u << (i % 8));
  }

  if (map.has_normals()) {
    std::size_t norm_base = b.size();
    b.resize(norm_base + 12 * n);
    std::memcpy(b.data() + norm_base, map.normals.data(), 12 * n);
  }
  return b;
}

void write_spm(const SpMap& map, const std::string& path) {
  std::vector<unsigned char> b = spm_bytes(map);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for write");
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
  if (!out) throw IoError(path + ": write failed");
}

SpMap read_spm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path + ": cannot open");
  std::vector<unsigned char> b((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
  if (b.size() < 32) throw BadMagic(path + ": shorter than header");
  if (std::memcmp(b.data(), "SPM1", 4) != 0) throw BadMagic(path + ": bad magic");
  if (b[4] != 0x01) throw BadMagic(path + ": unknown endian tag");
  unsigned flags = b[5];
  if (!(flags & 0x01)) throw HeaderMismatch(path + ": depth channel missing");
  bool with_normals = (flags & 0x02) != 0;

  SpMap map;
  map.version = get_u16(b.data() + 6);
  std::uint32_t H = get_u32(b.data() + 8);
  std::uint32_t W = get_u32(b.data() + 12);
  std::uint32_t k = get_u32(b.data() + 16);
  if (H < 2 || W < 4 || k < 1 || H > (1u << 20) || W > (1u << 20) || k > 4096) {
    throw HeaderMismatch(path + ": implausible dimensions");
  }
  map.grid = SphericalGrid(static_cast<int>(H), static_cast<int>(W));
  map.k = static_cast<int>(k);
  map.truncated_pixels = get_u32(b.data() + 20);
  map.source_hash = get_u64(b.data() + 24);

  std::uint64_t expect = spm_file_size(map.grid.H, map.grid.W, map.k, with_normals);
  if (b.size() != expect) {
    throw HeaderMismatch(path + ": size " + std::to_string(b.size()) +
                         " != expected " + std::to_string(expect));
  }

  std::size_t n = map.sample_count();
  map.depth.resize(n);
  std::memcpy(map.depth.data(), b.data() + 32, 4 * n);
  const unsigned char* mask = b.data() + 32 + 4 * n;
  for (std::size_t i = 0; i < n; ++i) {
    bool bit = (mask[i / 8] >> (i % 8)) & 1u;
    if (bit != (map.depth[i] > 0.0f)) {
      throw HeaderMismatch(path + ": validity mask disagrees with sentinels");
    }
  }
  if (with_normals) {
    map.normals.resize(3 * n);
    std::memcpy(map.normals.data(), mask + (n + 7) / 8, 12 * n);
  }
  validate_spmap(map);
  return map;
}

}  // namespace spmap
