#pragma once

#include <cstdint>
#include <vector>

#include "spmap/sp_map.hpp"

namespace spmap {

// Boolean edge mask over an H x W layer, stored row-major.
struct EdgeMask {
  int H = 0;
  int W = 0;
  int margin = 0;
  std::vector<std::uint8_t> mask;

  bool at(int r, int c) const {
    return mask[static_cast<std::size_t>(r) * W + c] != 0;
  }
};

struct QualityWeights {
  double mu = 0.8;    // edge-region emphasis in [0,1]
  double zeta = 0.1;  // spectral magnitude-term weight
  double alpha = 1.0; // edge-weighted L1 weight in the combined score
  double beta = 0.1;  // spectral weight in the combined score
  double highpass_radius_frac = 0.25; // fraction of min(H,W)/2
  double sobel_threshold_frac = 0.05; // fraction of the layer depth range
  int margin = 2;     // edge-mask dilation radius in pixels
};

struct QualityBreakdown {
  double l1 = 0.0;
  double l_edge = 0.0;
  double l_spec = 0.0;
  double total = 0.0;
};

// Sobel gradient magnitude with wrapped columns and clamped rows.
Image sobel_magnitude(const Image& img);

// Threshold = frac * (max - min) of the image values.
double default_sobel_threshold(const Image& img, double frac);

// Thresholded Sobel magnitude dilated by a (2*margin+1)^2 square element.
// Dilation wraps columns and clamps rows, so the mask commutes with cyclic
// column rotation.
EdgeMask edge_mask(const Image& ref_layer, int margin, double threshold);

// Region-balanced L1 between one layer of two maps over co-valid pixels:
// mu * mean(|cand-ref|) inside the mask + (1-mu) * mean outside it.
// An empty region contributes zero.
double edge_weighted_l1(const SpMap& cand, const SpMap& ref, int layer,
                        const EdgeMask& mask, double mu);

// High-pass spectral distance: centered 2D DFT of both images (scaled by
// 1/(H*W)), keep bins strictly outside radius highpass_radius_frac*min(H,W)/2,
// return mean over kept bins of wrapped |phase difference| plus zeta times
// |magnitude difference|.  Bins where both magnitudes fall below a tiny floor
// skip the phase term (phase of numerical noise is meaningless).
double spectral_loss(const Image& cand, const Image& ref,
                     const QualityWeights& w);
double spectral_loss(const SpMap& cand, const SpMap& ref, int layer,
                     const QualityWeights& w);

// Per-layer plain L1 over co-valid pixels + alpha * edge_weighted_l1 (mask
// from the reference layer) + beta * spectral_loss, averaged over layers.
QualityBreakdown combined_quality(const SpMap& cand, const SpMap& ref,
                                  const QualityWeights& w = {});

}  // namespace spmap
