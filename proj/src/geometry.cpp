#include "fls/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fls {

void SensorConfig::validate() const {
  if (!(r_min > 0.0)) throw std::invalid_argument("SensorConfig: r_min must be > 0");
  if (!(r_max > r_min)) throw std::invalid_argument("SensorConfig: r_max must be > r_min");
  if (n_range < 2) throw std::invalid_argument("SensorConfig: n_range must be >= 2");
  if (n_azimuth < 2) throw std::invalid_argument("SensorConfig: n_azimuth must be >= 2");
  if (!(azimuth_fov > 0.0) || !(elevation_aperture > 0.0))
    throw std::invalid_argument("SensorConfig: fields of view must be positive");
}

std::string SensorConfig::to_json() const {
  nlohmann::ordered_json j;
  j["r_min"] = r_min;
  j["r_max"] = r_max;
  j["n_range"] = n_range;
  j["n_azimuth"] = n_azimuth;
  j["azimuth_fov"] = rad2deg(azimuth_fov);
  j["elevation_aperture"] = rad2deg(elevation_aperture);
  return j.dump(2);
}

SensorConfig SensorConfig::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  SensorConfig c;
  c.r_min = j.at("r_min").get<double>();
  c.r_max = j.at("r_max").get<double>();
  c.n_range = j.at("n_range").get<int>();
  c.n_azimuth = j.at("n_azimuth").get<int>();
  c.azimuth_fov = deg2rad(j.at("azimuth_fov").get<double>());
  c.elevation_aperture = deg2rad(j.at("elevation_aperture").get<double>());
  c.validate();
  return c;
}

void SensorConfig::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << to_json() << "\n";
}

SensorConfig SensorConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

void RigidMotion::validate() const {
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-9)
    throw std::invalid_argument("RigidMotion: rotation not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("RigidMotion: det(R) != +1");
}

Vec3 backproject(const PolarCoord& c) {
  const double cp = std::cos(c.phi);
  return {c.r * cp * std::cos(c.theta), c.r * cp * std::sin(c.theta),
          c.r * std::sin(c.phi)};
}

PolarCoord project(const Vec3& p) {
  const double r = p.norm();
  if (r == 0.0) throw std::domain_error("project: zero-norm point");
  PolarCoord c;
  c.r = r;
  c.theta = std::atan2(p.y(), p.x());
  c.phi = std::asin(std::clamp(p.z() / r, -1.0, 1.0));
  return c;
}

PixelCoord pixel_of(const PolarCoord& c) {
  return {c.r * std::cos(c.theta), c.r * std::sin(c.theta)};
}

static Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return s;
}

Mat3 so3_exp(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 W = skew(w);
  if (theta < 1e-10) return Mat3::Identity() + W + 0.5 * W * W;
  const double s = std::sin(theta) / theta;
  const double c = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + s * W + c * W * W;
}

// Left Jacobian of SO(3): translation part of the SE(3) exponential.
static Mat3 so3_left_jacobian(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 W = skew(w);
  if (theta < 1e-8) return Mat3::Identity() + 0.5 * W + (1.0 / 6.0) * W * W;
  const double a = (1.0 - std::cos(theta)) / (theta * theta);
  const double b = (theta - std::sin(theta)) / (theta * theta * theta);
  return Mat3::Identity() + a * W + b * W * W;
}

RigidMotion exp_twist(const Twist& xi) {
  // exp(-xi) == exp(xi)^-1: a stationary scene seen from the moved sensor.
  const Vec3 w = -xi.omega;
  return {so3_exp(w), so3_left_jacobian(w) * (-xi.t)};
}

}  // namespace fls
