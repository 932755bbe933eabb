// Inverse warping: synthesize the target view by sampling the source image
// at locations predicted from the target elevation map and a finite motion,
// with analytic derivatives with respect to the elevation angle.

#ifndef FLS_WARP_HPP
#define FLS_WARP_HPP

#include "fls/geometry.hpp"
#include "fls/image.hpp"

namespace fls {

struct WarpResult {
  GridD synth;        // synthesized target intensities
  GridB in_bounds;    // sample fell inside the source grid (and E_t valid)
  GridD jacobian;     // d synth / d phi [intensity per radian], where in_bounds
  GridD sample_row;   // continuous source grid coordinates, for diagnostics
  GridD sample_col;

  double in_bounds_fraction() const;
};

/// For each valid target pixel: backproject (r_t, theta_t, phi_t), map
/// through M_{t->s}, re-polarize to (r_s, theta_s) and bilinearly sample the
/// source. Samples outside the source grid are flagged out of bounds and
/// excluded from losses; sampling happens purely in the (r, theta) grid.
/// Throws std::invalid_argument when the map and image shapes differ.
WarpResult inverse_warp(const ElevationMap& target_elevation,
                        const PolarImage& source, const RigidMotion& motion,
                        bool with_jacobian = true);

/// Bilinear lookup at continuous grid coordinates (row, col). Out-of-grid
/// coordinates (outside [0, H-1] x [0, W-1]) return 0.
double bilinear_sample(const GridD& img, double row, double col);

}  // namespace fls

#endif  // FLS_WARP_HPP
