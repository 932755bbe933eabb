#include "fls/motion_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fls {

Vec3 point_velocity(const Vec3& p, const Twist& xi) {
  return -xi.omega.cross(p) - xi.t;
}

double elevation_rate(const PolarCoord& c, const Vec3& dp) {
  if (c.r <= 0.0) throw std::domain_error("elevation_rate: r must be > 0");
  const Vec3 e_phi(-std::cos(c.theta) * std::sin(c.phi),
                   -std::sin(c.theta) * std::sin(c.phi), std::cos(c.phi));
  return e_phi.dot(dp) / c.r;
}

Vec2 exact_field(const PixelCoord& s, double phi, const Twist& xi) {
  const double r = s.range();
  if (r == 0.0) throw std::domain_error("exact_field: |s| must be > 0");
  const double xs = s.x_s, ys = s.y_s;
  const double cp = std::cos(phi), sp = std::sin(phi), tp = std::tan(phi);
  const double sptp = sp * tp;
  const double r2 = r * r;
  const double tx = xi.t.x(), ty = xi.t.y(), tz = xi.t.z();
  const double wx = xi.omega.x(), wy = xi.omega.y(), wz = xi.omega.z();

  const double dx = -tx / cp - (tz * sp / r) * xs + wz * ys
                    + (sptp * tx / r2) * xs * xs
                    + (sptp * ty / r2 - tp * wx / r) * xs * ys
                    - (tp * wy / r) * ys * ys;
  const double dy = -ty / cp - (tz * sp / r) * ys - wz * xs
                    + (sptp * ty / r2) * ys * ys
                    + (sptp * tx / r2 + tp * wy / r) * xs * ys
                    + (tp * wx / r) * xs * xs;
  return {dx, dy};
}

Vec2 approx_field(const PixelCoord& s, double phi, const Twist& xi) {
  const double r = s.range();
  if (r == 0.0) throw std::domain_error("approx_field: |s| must be > 0");
  const double xs = s.x_s, ys = s.y_s;
  const double sp = std::sin(phi), tp = std::tan(phi);
  const double tx = xi.t.x(), ty = xi.t.y(), tz = xi.t.z();
  const double wx = xi.omega.x(), wy = xi.omega.y(), wz = xi.omega.z();

  const double dx = -tx - (tz * sp / r) * xs + wz * ys
                    - (tp * wx / r) * xs * ys - (tp * wy / r) * ys * ys;
  const double dy = -ty - (tz * sp / r) * ys - wz * xs
                    + (tp * wy / r) * xs * ys + (tp * wx / r) * xs * xs;
  return {dx, dy};
}

Vec2 basic_horizontal(const PixelCoord& s, double t_x, double t_y,
                      double omega_z) {
  return {-t_x + omega_z * s.y_s, -t_y - omega_z * s.x_s};
}

Vec2 basic_roll(const PixelCoord& s, double phi, double omega_x) {
  const double r = s.range();
  const double ct = std::cos(s.theta()), st = std::sin(s.theta());
  const double k = r * omega_x * std::tan(phi);
  return {-k * ct * st, k * ct * ct};
}

Vec2 basic_pitch(const PixelCoord& s, double phi, double omega_y) {
  const double r = s.range();
  const double ct = std::cos(s.theta()), st = std::sin(s.theta());
  const double k = r * omega_y * std::tan(phi);
  return {-k * st * st, k * ct * st};
}

Vec2 basic_ztrans(const PixelCoord& s, double phi, double t_z) {
  const double ct = std::cos(s.theta()), st = std::sin(s.theta());
  const double k = -t_z * std::sin(phi);
  return {k * ct, k * st};
}

double SensitivityScan::max_abs_dx() const {
  double m = 0.0;
  for (const Vec2& d : displacement) m = std::max(m, std::abs(d.x()));
  return m;
}

double SensitivityScan::max_abs_dy() const {
  double m = 0.0;
  for (const Vec2& d : displacement) m = std::max(m, std::abs(d.y()));
  return m;
}

std::string SensitivityScan::to_csv() const {
  std::string out = "theta_deg,dx_m,dy_m,rho_m,gamma_m\n";
  char line[160];
  for (size_t k = 0; k < theta.size(); ++k) {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  rad2deg(theta[k]), displacement[k].x(), displacement[k].y(),
                  rho, gamma);
    out += line;
  }
  return out;
}

SensitivityScan sensitivity_scan(const SensorConfig& config, double r,
                                 double phi, const Twist& xi,
                                 double theta_min, double theta_max,
                                 int n_samples) {
  if (n_samples < 2)
    throw std::invalid_argument("sensitivity_scan: n_samples must be >= 2");
  SensitivityScan scan;
  scan.r = r;
  scan.phi = phi;
  scan.twist = xi;
  scan.rho = config.range_resolution();
  scan.gamma = config.tangential_resolution(r);
  scan.theta.resize(n_samples);
  scan.displacement.resize(n_samples);
  const double step = (theta_max - theta_min) / (n_samples - 1);
  for (int k = 0; k < n_samples; ++k) {
    const double theta = theta_min + k * step;
    const PixelCoord s{r * std::cos(theta), r * std::sin(theta)};
    scan.theta[k] = theta;
    scan.displacement[k] = exact_field(s, phi, xi);
  }
  return scan;
}

MotionFieldGrid motion_field_grid(const SensorConfig& config,
                                  const ElevationMap& elevation,
                                  const Twist& xi, bool exact) {
  if (!elevation.phi.same_shape(config.n_range, config.n_azimuth))
    throw std::invalid_argument("motion_field_grid: map/config shape mismatch");
  MotionFieldGrid grid;
  grid.field = Grid<Vec2>(config.n_range, config.n_azimuth, Vec2::Zero());
  grid.valid = elevation.valid;
  grid.twist = xi;
  for (int i = 0; i < config.n_range; ++i) {
    const double r = config.range_of_row(i);
    for (int j = 0; j < config.n_azimuth; ++j) {
      if (!elevation.valid.at(i, j)) continue;
      const double theta = config.theta_of_col(j);
      const PixelCoord s{r * std::cos(theta), r * std::sin(theta)};
      const double phi = elevation.phi.at(i, j);
      grid.field.at(i, j) =
          exact ? exact_field(s, phi, xi) : approx_field(s, phi, xi);
    }
  }
  return grid;
}

std::string MotionFieldGrid::to_csv(const SensorConfig& config) const {
  std::string out = "r_m,theta_deg,dx_m,dy_m,rho_m,gamma_m\n";
  char line[192];
  for (int i = 0; i < field.h; ++i) {
    const double r = config.range_of_row(i);
    for (int j = 0; j < field.w; ++j) {
      if (!valid.at(i, j)) continue;
      std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r,
                    rad2deg(config.theta_of_col(j)), field.at(i, j).x(),
                    field.at(i, j).y(), config.range_resolution(),
                    config.tangential_resolution(r));
      out += line;
    }
  }
  return out;
}

double degeneracy_score(const Twist& xi, const SensorConfig& config) {
  const double rho = config.range_resolution();
  const double phi_hi = config.phi_half();
  double acc = 0.0;
  for (int i = 0; i < config.n_range; ++i) {
    const double r = config.range_of_row(i);
    const double gamma = config.tangential_resolution(r);
    for (int j = 0; j < config.n_azimuth; ++j) {
      const double theta = config.theta_of_col(j);
      const PixelCoord s{r * std::cos(theta), r * std::sin(theta)};
      const Vec2 d = exact_field(s, phi_hi, xi) - exact_field(s, -phi_hi, xi);
      acc += std::max(std::abs(d.x()) / rho, std::abs(d.y()) / gamma);
    }
  }
  return acc / (double(config.n_range) * config.n_azimuth);
}

}  // namespace fls
