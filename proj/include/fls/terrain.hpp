// Procedural seabed heightfields: seeded multi-octave value noise sampled on
// a regular grid with bilinear interpolation.

#ifndef FLS_TERRAIN_HPP
#define FLS_TERRAIN_HPP

#include <cstdint>
#include <vector>

#include "fls/geometry.hpp"
#include "fls/image.hpp"

namespace fls {

struct TerrainParams {
  double extent = 16.0;       // [m], square side centered at the origin
  int grid = 512;             // samples per side
  double amplitude = 0.20;    // [m], height scale of the base octave
  double base_wavelength = 3.0;  // [m]
  int octaves = 4;
  double lacunarity = 2.0;
  // Sub-unity slope persistence: fine octaves stay gentle so grazing-angle
  // shadows come from the large structure, not sub-bin micro relief.
  double gain = 0.38;
  // Reflectivity texture riding on the surface. Attached to 3D points it is
  // view-invariant, so it feeds the photometric signal without hurting
  // cross-view consistency. Wavelengths sit well above the sensor
  // resolution so the texture is both resolvable and interpolation-friendly.
  double albedo_min = 0.25;
  double albedo_wavelength = 0.45;  // [m]
  double albedo_lacunarity = 3.0;
  double albedo_gain = 0.6;
  int albedo_octaves = 2;
};

/// Heightfield z = h(x, y). Deterministic for a fixed seed; identical seeds
/// produce bitwise-identical fields.
class Terrain {
 public:
  Terrain() = default;
  Terrain(uint64_t seed, const TerrainParams& params);

  /// Bilinear height; queries outside the extent fall off to a deep floor so
  /// rays exit cleanly.
  double height(double x, double y) const;
  /// Upward surface normal from central differences of the grid.
  Vec3 normal(double x, double y) const;
  /// Surface reflectivity in [albedo_min, 1].
  double albedo(double x, double y) const;

  uint64_t seed() const { return seed_; }
  const TerrainParams& params() const { return params_; }
  const GridD& heights() const { return heights_; }

 private:
  uint64_t seed_ = 0;
  TerrainParams params_;
  GridD heights_;
  double cell_ = 1.0;  // grid spacing [m]
};

Terrain gen_terrain(uint64_t seed, const TerrainParams& params = {});

/// SplitMix64 step: the project-wide deterministic seed splitter.
uint64_t split_seed(uint64_t seed, uint64_t index);

}  // namespace fls

#endif  // FLS_TERRAIN_HPP
