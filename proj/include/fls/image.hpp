// Co-registered range-azimuth rasters (intensity, validity, elevation) and
// their binary file format, plus PLY point clouds.
//
// Raster container layout: 16-byte magic+version header, then H and W as
// 32-bit little-endian unsigned, then row-major 32-bit little-endian float
// planes. Images carry one plane, elevation maps two (phi, validity), masks
// one (validity). A JSON sidecar carries the SensorConfig and frame pose.

#ifndef FLS_IMAGE_HPP
#define FLS_IMAGE_HPP

#include <string>
#include <vector>

#include "fls/geometry.hpp"

namespace fls {

/// Dense row-major H x W grid.
template <typename T>
struct Grid {
  int h = 0;
  int w = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int h_, int w_, T fill = T{}) : h(h_), w(w_), data(size_t(h_) * w_, fill) {}

  T& at(int i, int j) { return data[size_t(i) * w + j]; }
  const T& at(int i, int j) const { return data[size_t(i) * w + j]; }
  bool in(int i, int j) const { return i >= 0 && i < h && j >= 0 && j < w; }
  size_t size() const { return data.size(); }
  bool same_shape(int oh, int ow) const { return h == oh && w == ow; }
};

using GridD = Grid<double>;
using GridB = Grid<uint8_t>;

/// Range-azimuth intensity raster in [0,1]. Rows are range bins
/// (r_min -> r_max), columns azimuth bins (-fov/2 -> +fov/2).
struct PolarImage {
  GridD intensity;
  SensorConfig config;
  RigidMotion pose;  // world <- sensor

  PolarImage() = default;
  PolarImage(const SensorConfig& c)
      : intensity(c.n_range, c.n_azimuth, 0.0), config(c) {}

  int h() const { return intensity.h; }
  int w() const { return intensity.w; }
};

/// Per-pixel elevation angle with validity; valid pixels satisfy
/// |phi| <= aperture/2.
struct ElevationMap {
  GridD phi;
  GridB valid;

  ElevationMap() = default;
  ElevationMap(int h, int w) : phi(h, w, 0.0), valid(h, w, 0) {}

  int h() const { return phi.h; }
  int w() const { return phi.w; }
  size_t valid_count() const;
};

/// Binary map of informative pixels.
struct SignalMask {
  GridB valid;
  double threshold = 0.0;

  SignalMask() = default;
  SignalMask(int h, int w, uint8_t fill = 0) : valid(h, w, fill) {}

  int h() const { return valid.h; }
  int w() const { return valid.w; }
  size_t count() const;
};

/// 3D points, meters, in a declared frame.
struct PointCloud {
  std::vector<Vec3> points;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// --- Raster file IO (see header comment for the layout) ---

void save_image(const std::string& path, const PolarImage& img);
PolarImage load_image(const std::string& path);

void save_elevation(const std::string& path, const ElevationMap& map);
ElevationMap load_elevation(const std::string& path);

void save_mask(const std::string& path, const SignalMask& mask);
SignalMask load_mask(const std::string& path);

/// JSON sidecar (config + pose) next to a raster file.
void save_sidecar(const std::string& path, const SensorConfig& config,
                  const RigidMotion& pose);
void load_sidecar(const std::string& path, SensorConfig& config,
                  RigidMotion& pose);

// --- Point cloud IO (ASCII PLY, x y z in meters) ---

void save_ply(const std::string& path, const PointCloud& cloud);
PointCloud load_ply(const std::string& path);

/// Write to <path>.tmp then rename; partial files never appear at <path>.
void atomic_write(const std::string& path, const std::string& contents);

}  // namespace fls

#endif  // FLS_IMAGE_HPP
