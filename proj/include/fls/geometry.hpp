// Coordinate conventions, FLS projection model and rigid-motion algebra.
//
// Frame convention: x forward along the acoustic axis, y starboard, z up.
// Azimuth theta is measured in the z=0 plane from +x toward +y, elevation
// phi from that plane toward +z. All angles are radians except at file/CLI
// boundaries.

#ifndef FLS_GEOMETRY_HPP
#define FLS_GEOMETRY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace fls {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Polar imaging grid and physical resolutions of a forward-looking sonar.
/// Rows index range bins (r_min -> r_max), columns azimuth bins
/// (-azimuth_fov/2 -> +azimuth_fov/2); both use pixel-center sampling.
struct SensorConfig {
  double r_min = 1.0;   // [m]
  double r_max = 5.2;   // [m]
  int n_range = 1400;   // H
  int n_azimuth = 128;  // W
  double azimuth_fov = deg2rad(30.0);          // [rad], symmetric about 0
  double elevation_aperture = deg2rad(14.0);   // [rad], symmetric about 0

  // Range resolution rho. The default profile mirrors an ARIS EXPLORER
  // 3000-class sensor: 14 deg aperture and rho = 0.003 m exactly.
  double range_resolution() const { return (r_max - r_min) / n_range; }
  // Tangential (arc-length) resolution at range r.
  double tangential_resolution(double r) const {
    return r * azimuth_fov / n_azimuth;
  }

  double phi_half() const { return elevation_aperture / 2.0; }
  double theta_half() const { return azimuth_fov / 2.0; }

  double range_of_row(double row) const {
    return r_min + (row + 0.5) * range_resolution();
  }
  double theta_of_col(double col) const {
    return -theta_half() + (col + 0.5) * (azimuth_fov / n_azimuth);
  }
  // Continuous grid coordinates of a polar position (pixel centers at
  // integer coordinates).
  double row_of_range(double r) const {
    return (r - r_min) / range_resolution() - 0.5;
  }
  double col_of_theta(double theta) const {
    return (theta + theta_half()) / (azimuth_fov / n_azimuth) - 0.5;
  }

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  bool operator==(const SensorConfig&) const = default;

  // JSON round trip; angles are stored in degrees in the file.
  std::string to_json() const;
  static SensorConfig from_json(const std::string& text);
  void save(const std::string& path) const;
  static SensorConfig load(const std::string& path);
};

/// (r, theta, phi) position in the sonar frame.
struct PolarCoord {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

/// Cartesian image coordinates (x_s, y_s) = (r cos theta, r sin theta).
struct PixelCoord {
  double x_s = 0.0;
  double y_s = 0.0;

  double range() const { return std::sqrt(x_s * x_s + y_s * y_s); }
  double theta() const { return std::atan2(y_s, x_s); }
};

/// Small sensor motion in the sensor frame: translation velocity t and
/// right-handed angular velocity omega.
struct Twist {
  Vec3 t = Vec3::Zero();
  Vec3 omega = Vec3::Zero();

  Twist operator+(const Twist& o) const { return {t + o.t, omega + o.omega}; }
  Twist operator*(double s) const { return {t * s, omega * s}; }
  Twist operator-() const { return {-t, -omega}; }
};

/// Finite rigid transform. For a frame pair it is read as M_{t->s}: applied
/// to target-frame points it yields source-frame coordinates.
struct RigidMotion {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidMotion inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
  RigidMotion compose(const RigidMotion& inner) const {
    return {rotation * inner.rotation,
            rotation * inner.translation + translation};
  }
  bool is_identity() const {
    return rotation == Mat3::Identity() && translation == Vec3::Zero();
  }
  // Orthonormality / det(R)=+1 within 1e-9; throws otherwise.
  void validate() const;
};

// --- Projection model ---

/// Polar -> Euclidean: (r cos phi cos theta, r cos phi sin theta, r sin phi).
Vec3 backproject(const PolarCoord& c);

/// Euclidean -> polar, the exact inverse of backproject. Poles and angles
/// outside any aperture are returned as-is; clipping is the caller's job.
/// Throws std::domain_error on zero-norm input.
PolarCoord project(const Vec3& p);

/// 2D pixel position: (r cos theta, r sin theta). Equals the (x, y) of
/// backproject(c) divided by cos phi.
PixelCoord pixel_of(const PolarCoord& c);

// --- Rigid-motion algebra ---

/// Rodrigues rotation exp([w]x).
Mat3 so3_exp(const Vec3& w);

/// Finite motion induced on scene points by the sensor moving with twist xi
/// for unit time: the SE(3) exponential of -xi. exp_twist(0) == identity and
/// the induced displacement converges to -omega x p - t for small xi.
RigidMotion exp_twist(const Twist& xi);

/// R * p + translation.
inline Vec3 transform(const RigidMotion& m, const Vec3& p) { return m.apply(p); }

}  // namespace fls

#endif  // FLS_GEOMETRY_HPP
