#include "spmap/quality.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "spmap/errors.hpp"

namespace spmap {

namespace {

// Magnitudes below this (after 1/(H*W) scaling) are treated as zero when
// comparing phases; the phase of rounding noise carries no information.
constexpr double kPhaseMagFloor = 1e-12;

void require_same_shape(int h0, int w0, int h1, int w1, const char* what) {
  if (h0 != h1 || w0 != w1) {
    throw GridMismatch(std::string(what) + ": shapes " + std::to_string(h0) +
                       "x" + std::to_string(w0) + " vs " + std::to_string(h1) +
                       "x" + std::to_string(w1));
  }
}

double wrapped_phase_diff(double a, double b) {
  double d = std::fabs(a - b);
  if (d > kPi) d = 2.0 * kPi - d;
  return d;
}

// FFTW plan creation is not thread safe; executions on distinct buffers are.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

// Forward c2c DFT scaled by 1/(H*W); output row-major (re, im) pairs.
std::vector<double> dft2d(const Image& img) {
  int H = img.h, W = img.w;
  std::size_t n = static_cast<std::size_t>(H) * W;
  std::vector<double> out(2 * n);
  fftw_complex* in = fftw_alloc_complex(n);
  fftw_complex* spec = fftw_alloc_complex(n);
  for (std::size_t i = 0; i < n; ++i) {
    in[i][0] = img.v[i];
    in[i][1] = 0.0;
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_2d(H, W, in, spec, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = spec[i][0] * scale;
    out[2 * i + 1] = spec[i][1] * scale;
  }
  fftw_free(in);
  fftw_free(spec);
  return out;
}

}  // namespace

Image sobel_magnitude(const Image& img) {
  Image padded = circular_pad(img, 1);
  Image out;
  out.h = img.h;
  out.w = img.w;
  out.v.assign(static_cast<std::size_t>(img.h) * img.w, 0.0);
  auto p = [&](int r, int c) {
    return padded.v[static_cast<std::size_t>(r) * padded.w + c];
  };
  for (int r = 0; r < img.h; ++r) {
    for (int c = 0; c < img.w; ++c) {
      int pr = r + 1, pc = c + 1;
      double gx = -p(pr - 1, pc - 1) + p(pr - 1, pc + 1) -
                  2.0 * p(pr, pc - 1) + 2.0 * p(pr, pc + 1) -
                  p(pr + 1, pc - 1) + p(pr + 1, pc + 1);
      double gy = -p(pr - 1, pc - 1) - 2.0 * p(pr - 1, pc) -
                  p(pr - 1, pc + 1) + p(pr + 1, pc - 1) +
                  2.0 * p(pr + 1, pc) + p(pr + 1, pc + 1);
      out.v[static_cast<std::size_t>(r) * img.w + c] = std::hypot(gx, gy);
    }
  }
  return out;
}

double default_sobel_threshold(const Image& img, double frac) {
  if (img.v.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(img.v.begin(), img.v.end());
  return frac * (*hi - *lo);
}

EdgeMask edge_mask(const Image& ref_layer, int margin, double threshold) {
  if (margin < 0) throw OutOfRange("edge_mask: negative margin");
  Image mag = sobel_magnitude(ref_layer);
  int H = ref_layer.h, W = ref_layer.w;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(H) * W, 0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = mag.v[i] > threshold ? 1 : 0;
  }
  EdgeMask em;
  em.H = H;
  em.W = W;
  em.margin = margin;
  em.mask.assign(raw.size(), 0);
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      std::uint8_t hit = 0;
      for (int dr = -margin; dr <= margin && !hit; ++dr) {
        int rr = std::clamp(r + dr, 0, H - 1);
        for (int dc = -margin; dc <= margin; ++dc) {
          int cc = ((c + dc) % W + W) % W;
          if (raw[static_cast<std::size_t>(rr) * W + cc]) {
            hit = 1;
            break;
          }
        }
      }
      em.mask[static_cast<std::size_t>(r) * W + c] = hit;
    }
  }
  return em;
}

double edge_weighted_l1(const SpMap& cand, const SpMap& ref, int layer,
                        const EdgeMask& mask, double mu) {
  require_same_shape(cand.grid.H, cand.grid.W, ref.grid.H, ref.grid.W,
                     "edge_weighted_l1");
  require_same_shape(mask.H, mask.W, ref.grid.H, ref.grid.W,
                     "edge_weighted_l1 mask");
  if (layer < 0 || layer >= cand.k || layer >= ref.k) {
    throw OutOfRange("edge_weighted_l1: layer out of range");
  }
  double sum_edge = 0.0, sum_flat = 0.0;
  std::size_t n_edge = 0, n_flat = 0;
  for (int r = 0; r < ref.grid.H; ++r) {
    for (int c = 0; c < ref.grid.W; ++c) {
      if (!cand.valid(layer, r, c) || !ref.valid(layer, r, c)) continue;
      double d = std::fabs(static_cast<double>(cand.at(layer, r, c)) -
                           static_cast<double>(ref.at(layer, r, c)));
      if (mask.at(r, c)) {
        sum_edge += d;
        ++n_edge;
      } else {
        sum_flat += d;
        ++n_flat;
      }
    }
  }
  double mean_edge = n_edge ? sum_edge / n_edge : 0.0;
  double mean_flat = n_flat ? sum_flat / n_flat : 0.0;
  return mu * mean_edge + (1.0 - mu) * mean_flat;
}

double spectral_loss(const Image& cand, const Image& ref,
                     const QualityWeights& w) {
  require_same_shape(cand.h, cand.w, ref.h, ref.w, "spectral_loss");
  int H = ref.h, W = ref.w;
  std::vector<double> a = dft2d(cand);
  std::vector<double> b = dft2d(ref);
  double radius = w.highpass_radius_frac * 0.5 * std::min(H, W);
  double sum = 0.0;
  std::size_t n = 0;
  for (int u = 0; u < H; ++u) {
    double fu = (u <= H / 2) ? u : u - H;
    for (int v = 0; v < W; ++v) {
      double fv = (v <= W / 2) ? v : v - W;
      if (std::hypot(fu, fv) <= radius) continue;
      std::size_t i = static_cast<std::size_t>(u) * W + v;
      double mag_a = std::hypot(a[2 * i], a[2 * i + 1]);
      double mag_b = std::hypot(b[2 * i], b[2 * i + 1]);
      if (mag_a >= kPhaseMagFloor || mag_b >= kPhaseMagFloor) {
        double pa = std::atan2(a[2 * i + 1], a[2 * i]);
        double pb = std::atan2(b[2 * i + 1], b[2 * i]);
        sum += wrapped_phase_diff(pa, pb);
      }
      sum += w.zeta * std::fabs(mag_a - mag_b);
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

double spectral_loss(const SpMap& cand, const SpMap& ref, int layer,
                     const QualityWeights& w) {
  if (layer < 0 || layer >= cand.k || layer >= ref.k) {
    throw OutOfRange("spectral_loss: layer out of range");
  }
  return spectral_loss(layer_image(cand, layer), layer_image(ref, layer), w);
}

QualityBreakdown combined_quality(const SpMap& cand, const SpMap& ref,
                                  const QualityWeights& w) {
  require_same_shape(cand.grid.H, cand.grid.W, ref.grid.H, ref.grid.W,
                     "combined_quality");
  if (cand.k != ref.k) {
    throw GridMismatch("combined_quality: layer counts " +
                       std::to_string(cand.k) + " vs " +
                       std::to_string(ref.k));
  }
  QualityBreakdown out;
  for (int layer = 0; layer < ref.k; ++layer) {
    Image ref_img = layer_image(ref, layer);
    double threshold = default_sobel_threshold(ref_img, w.sobel_threshold_frac);
    EdgeMask mask = edge_mask(ref_img, w.margin, threshold);

    double sum = 0.0;
    std::size_t n = 0;
    for (int r = 0; r < ref.grid.H; ++r) {
      for (int c = 0; c < ref.grid.W; ++c) {
        if (!cand.valid(layer, r, c) || !ref.valid(layer, r, c)) continue;
        sum += std::fabs(static_cast<double>(cand.at(layer, r, c)) -
                         static_cast<double>(ref.at(layer, r, c)));
        ++n;
      }
    }
    out.l1 += n ? sum / n : 0.0;
    out.l_edge += edge_weighted_l1(cand, ref, layer, mask, w.mu);
    out.l_spec += spectral_loss(cand, ref, layer, w);
  }
  double inv_k = 1.0 / static_cast<double>(ref.k);
  out.l1 *= inv_k;
  out.l_edge *= inv_k;
  out.l_spec *= inv_k;
  out.total = out.l1 + w.alpha * out.l_edge + w.beta * out.l_spec;
  return out;
}

}  // namespace spmap
