// Raycast rendering of polar acoustic images from heightfield terrain, with
// ground-truth elevation maps and point clouds.

#ifndef FLS_SIMULATOR_HPP
#define FLS_SIMULATOR_HPP

#include "fls/geometry.hpp"
#include "fls/image.hpp"
#include "fls/terrain.hpp"

namespace fls {

struct RenderOptions {
  int n_phi = 256;          // elevation samples across the aperture
  double intensity_scale = 1.0;
  bool spreading_loss = false;  // optional 1/r^2 falloff, off by default
  double march_step = 0.01;     // [m] coarse ray-march step
  // Adjacent elevation samples whose hit ranges differ by more than this are
  // treated as an occlusion boundary rather than one surface patch.
  double continuity_threshold = 0.35;  // [m]
  // Sub-beams averaged per azimuth column. Bandlimits the image along the
  // one axis the renderer would otherwise sample with a delta per bin; the
  // ground-truth cloud keeps the first sub-beam's hits.
  int azimuth_supersample = 2;
};

struct RenderResult {
  PolarImage image;
  ElevationMap elevation;  // per-pixel phi of the dominant return
  PointCloud cloud;        // every terrain hit, sensor frame
  size_t multi_hit_pixels = 0;  // pixels with returns from disjoint elevations
};

/// March rays over n_phi elevation samples per azimuth beam and deposit
/// Lambertian returns into range bins. Each beam's hit profile is splatted
/// as piecewise-linear segments across the bins it spans, so images vary
/// smoothly under small pose changes. Ground-truth elevation per pixel is
/// the energy-weighted phi of the strongest contiguous return; pixels with
/// no hit are invalid with intensity 0. An empty frustum yields all-invalid
/// outputs, not an error.
RenderResult render(const Terrain& terrain, const RigidMotion& pose,
                    const SensorConfig& config, const RenderOptions& opts = {});

/// Fraction of pixels with any return; cheap coarse probe used for sensor
/// placement.
double coverage_fraction(const Terrain& terrain, const RigidMotion& pose,
                         const SensorConfig& config, const RenderOptions& opts);

}  // namespace fls

#endif  // FLS_SIMULATOR_HPP
