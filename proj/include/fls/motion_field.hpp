// Exact and small-aperture motion fields of the FLS, the four basic-motion
// closed forms, sensitivity scans and a degeneracy score.
//
// All displacement rates are derived from the rigid-scene velocity
// dp/dt = -omega x p - t. Note the printed expanded field in the source
// material carries the opposite sign on the rotation terms; the forms here
// are the ones consistent with that velocity (magnitudes are identical).

#ifndef FLS_MOTION_FIELD_HPP
#define FLS_MOTION_FIELD_HPP

#include <string>
#include <vector>

#include "fls/geometry.hpp"
#include "fls/image.hpp"

namespace fls {

/// Velocity of a stationary scene point in sensor coordinates while the
/// sensor moves with twist xi: -omega x p - t.
Vec3 point_velocity(const Vec3& p, const Twist& xi);

/// Elevation-angle rate induced by a point velocity dp:
/// (1/r) (-cos theta sin phi, -sin theta sin phi, cos phi) . dp.
/// Throws std::domain_error for r <= 0.
double elevation_rate(const PolarCoord& c, const Vec3& dp);

/// Exact per-pixel displacement rate (dx_s/dt, dy_s/dt), all second-order
/// terms included. Throws std::domain_error when |s| == 0.
Vec2 exact_field(const PixelCoord& s, double phi, const Twist& xi);

/// Small-aperture approximation: cos phi -> 1, sin phi * tan phi terms
/// dropped, first-order sin phi and tan phi terms kept.
Vec2 approx_field(const PixelCoord& s, double phi, const Twist& xi);

/// Horizontal motions (t_x, t_y, omega_z): elevation-independent by
/// construction, hence no phi argument.
Vec2 basic_horizontal(const PixelCoord& s, double t_x, double t_y,
                      double omega_z);

/// Closed forms of the three elevation-coupled basic motions, polar form.
Vec2 basic_roll(const PixelCoord& s, double phi, double omega_x);
Vec2 basic_pitch(const PixelCoord& s, double phi, double omega_y);
Vec2 basic_ztrans(const PixelCoord& s, double phi, double t_z);

/// Displacement tabulated against azimuth at fixed (r, phi, twist), with
/// the range and tangential resolution attached for reference.
struct SensitivityScan {
  std::vector<double> theta;      // [rad]
  std::vector<Vec2> displacement; // [m] per unit motion
  double r = 0.0;
  double phi = 0.0;
  Twist twist;
  double rho = 0.0;    // range resolution
  double gamma = 0.0;  // tangential resolution at r

  double max_abs_dx() const;
  double max_abs_dy() const;
  /// CSV with header "theta_deg,dx_m,dy_m,rho_m,gamma_m".
  std::string to_csv() const;
};

SensitivityScan sensitivity_scan(const SensorConfig& config, double r,
                                 double phi, const Twist& xi,
                                 double theta_min, double theta_max,
                                 int n_samples);

/// Per-pixel displacement rates over the sensor grid at a given elevation
/// map; pixels invalid in the map are flagged invalid.
struct MotionFieldGrid {
  Grid<Vec2> field;
  GridB valid;
  Twist twist;

  std::string to_csv(const SensorConfig& config) const;
};

MotionFieldGrid motion_field_grid(const SensorConfig& config,
                                  const ElevationMap& elevation,
                                  const Twist& xi, bool exact = true);

/// Resolvability of the elevation signal carried by a motion: the mean over
/// the sensor grid of the full-aperture displacement difference
/// exact_field(s, +aperture/2) - exact_field(s, -aperture/2), with the range
/// component measured against rho and the tangential component against
/// gamma(r). Scores below 1 mean elevation changes displace pixels by less
/// than a resolution cell on average, i.e. the motion is degenerate at this
/// scale.
double degeneracy_score(const Twist& xi, const SensorConfig& config);

}  // namespace fls

#endif  // FLS_MOTION_FIELD_HPP
