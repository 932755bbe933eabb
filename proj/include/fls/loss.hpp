// Self-supervision objective: masked SSIM+L1 reconstruction, edge-aware
// smoothness on the elevation map, and the weighted total with analytic
// per-pixel gradients with respect to the elevation angle.

#ifndef FLS_LOSS_HPP
#define FLS_LOSS_HPP

#include "fls/image.hpp"
#include "fls/warp.hpp"

namespace fls {

struct LossOptions {
  double beta = 0.3;       // SSIM share of the reconstruction loss
  double lambda_r = 2.0;
  double lambda_s = 1.0;
  int ssim_window = 7;     // odd, uniform weights
  double ssim_c1 = 1e-4;   // (0.01)^2 on unit dynamic range
  double ssim_c2 = 9e-4;   // (0.03)^2
  // Drop SSIM windows whose support straddles the mask boundary (default
  // keeps them).
  bool drop_straddling_windows = false;
  // Exclude smoothness difference positions that cross the mask boundary.
  bool exclude_mask_boundary = false;
};

struct SsimResult {
  GridD map;      // per-pixel SSIM, windows clipped at image borders
  double mean;    // over masked pixels
};

/// Windowed SSIM (uniform weights). Throws std::invalid_argument on shape
/// mismatch or an empty mask.
SsimResult ssim(const GridD& a, const GridD& b, const GridB& mask,
                const LossOptions& opts = {});
SsimResult ssim(const PolarImage& a, const PolarImage& b, const GridB& mask,
                const LossOptions& opts = {});

/// beta * mean(mask * (1 - SSIM)) + (1-beta) * mean(mask * |target - synth|),
/// both means over the masked pixel count. Optionally returns the gradient
/// with respect to the synthesized image (including the SSIM window path).
double recon_loss(const GridD& target, const GridD& synth, const GridB& mask,
                  const LossOptions& opts = {}, GridD* grad_synth = nullptr);

/// Edge-aware smoothness: per-axis means of |forward difference of
/// (mask * E)| weighted by exp(-|forward difference of intensity|).
/// Optionally returns the gradient with respect to the elevation map.
double smooth_loss(const ElevationMap& elevation, const GridD& intensity,
                   const GridB& mask, const LossOptions& opts = {},
                   GridD* grad_elev = nullptr);

struct LossBreakdown {
  double recon = 0.0;
  double smooth = 0.0;
  double total = 0.0;
  GridD grad_total;  // d total / d phi per pixel [1/rad]
  double beta = 0.3, lambda_r = 2.0, lambda_s = 1.0;
};

/// Weighted total for one source view. The reconstruction term is evaluated
/// on mask AND in-bounds pixels; its gradient chains through the warp
/// jacobian, the smoothness gradient acts on the map directly.
LossBreakdown total_loss(const GridD& target, const WarpResult& warp,
                         const ElevationMap& elevation, const GridB& mask,
                         const LossOptions& opts = {});

/// Peak signal-to-noise ratio over masked pixels, unit dynamic range.
double psnr(const GridD& a, const GridD& b, const GridB& mask);

}  // namespace fls

#endif  // FLS_LOSS_HPP
