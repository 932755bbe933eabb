#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>

#include <json.hpp>

#include "fls/geometry.hpp"

using namespace fls;

namespace {

PolarCoord random_polar(std::mt19937_64& rng, const SensorConfig& cfg) {
  std::uniform_real_distribution<double> ur(cfg.r_min, cfg.r_max);
  std::uniform_real_distribution<double> ut(-cfg.theta_half(), cfg.theta_half());
  std::uniform_real_distribution<double> up(-cfg.phi_half(), cfg.phi_half());
  return {ur(rng), ut(rng), up(rng)};
}

Twist random_twist(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ut(-0.2, 0.2);
  std::uniform_real_distribution<double> uw(-deg2rad(15.0), deg2rad(15.0));
  Twist xi;
  xi.t = Vec3(ut(rng), ut(rng), ut(rng));
  xi.omega = Vec3(uw(rng), uw(rng), uw(rng));
  return xi;
}

}  // namespace

TEST_CASE("backproject axis and symmetry points") {
  const Vec3 a = backproject({2.0, 0.0, 0.0});
  CHECK(a.isApprox(Vec3(2, 0, 0), 1e-15));
  const Vec3 b = backproject({2.0, kPi / 2.0, 0.0});
  CHECK(b.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.y() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.z() == 0.0);
}

TEST_CASE("backproject scalar evaluation") {
  const Vec3 p = backproject({3.5, deg2rad(10.0), deg2rad(3.5)});
  CHECK(p.x() == doctest::Approx(3.4406).epsilon(1e-4));
  CHECK(p.y() == doctest::Approx(0.6067).epsilon(1e-4));
  CHECK(p.z() == doctest::Approx(0.2137).epsilon(1e-3));
}

TEST_CASE("project basics and pole") {
  const PolarCoord c = project(Vec3(2, 0, 0));
  CHECK(c.r == doctest::Approx(2.0));
  CHECK(c.theta == 0.0);
  CHECK(c.phi == 0.0);

  // Pole: outside any aperture but still returned.
  const PolarCoord pole = project(Vec3(0, 0, 1));
  CHECK(pole.r == doctest::Approx(1.0));
  CHECK(pole.phi == doctest::Approx(kPi / 2.0));

  CHECK_THROWS_AS(project(Vec3::Zero()), std::domain_error);
}

TEST_CASE("project inverts backproject on the derived example") {
  const PolarCoord c = project(Vec3(3.4406, 0.6067, 0.2137));
  CHECK(c.r == doctest::Approx(3.5).epsilon(1e-3));
  CHECK(rad2deg(c.theta) == doctest::Approx(10.0).epsilon(1e-3));
  CHECK(rad2deg(c.phi) == doctest::Approx(3.5).epsilon(1e-3));
}

TEST_CASE("round trip over 1e4 random samples within 1e-12") {
  SensorConfig cfg;
  std::mt19937_64 rng(42);
  for (int k = 0; k < 10000; ++k) {
    const PolarCoord c = random_polar(rng, cfg);
    const PolarCoord back = project(backproject(c));
    CHECK(std::abs(back.r - c.r) <= 1e-12 * c.r);
    CHECK(std::abs(back.theta - c.theta) <= 1e-12);
    CHECK(std::abs(back.phi - c.phi) <= 1e-12);
  }
}

TEST_CASE("pixel_of ignores phi and matches scalar evaluation") {
  for (double phi : {-0.1, 0.0, 0.12}) {
    const PixelCoord s = pixel_of({2.0, 0.0, phi});
    CHECK(s.x_s == doctest::Approx(2.0));
    CHECK(s.y_s == 0.0);
  }
  const PixelCoord s = pixel_of({3.5, deg2rad(30.0), 0.0});
  CHECK(s.x_s == doctest::Approx(3.0311).epsilon(1e-4));
  CHECK(s.y_s == doctest::Approx(1.75).epsilon(1e-12));
}

TEST_CASE("pixel_of * cos(phi) equals the (x, y) of backproject") {
  SensorConfig cfg;
  std::mt19937_64 rng(7);
  for (int k = 0; k < 1000; ++k) {
    const PolarCoord c = random_polar(rng, cfg);
    const PixelCoord s = pixel_of(c);
    const Vec3 p = backproject(c);
    CHECK(std::abs(s.x_s * std::cos(c.phi) - p.x()) <= 1e-12);
    CHECK(std::abs(s.y_s * std::cos(c.phi) - p.y()) <= 1e-12);
  }
}

TEST_CASE("exp_twist of zero is the identity") {
  const RigidMotion m = exp_twist({});
  CHECK(m.rotation.isApprox(Mat3::Identity(), 1e-15));
  CHECK(m.translation.norm() == 0.0);
}

TEST_CASE("pure translation moves points opposite to the sensor") {
  Twist xi;
  xi.t = Vec3(0.1, 0, 0);
  const RigidMotion m = exp_twist(xi);
  CHECK(m.rotation.isApprox(Mat3::Identity(), 1e-15));
  const Vec3 p = transform(m, Vec3(1.5, 0.2, -0.3));
  CHECK(p.isApprox(Vec3(1.4, 0.2, -0.3), 1e-14));
}

TEST_CASE("pure roll matches the quaternion oracle") {
  Twist xi;
  xi.omega = Vec3(kPi / 2.0, 0, 0);
  const RigidMotion m = exp_twist(xi);
  // Moving the sensor by +90 deg about x turns scene coordinates by -90 deg.
  const Mat3 expected =
      Eigen::Quaterniond(Eigen::AngleAxisd(-kPi / 2.0, Vec3::UnitX()))
          .toRotationMatrix();
  CHECK((m.rotation - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((m.rotation.transpose() * m.rotation - Mat3::Identity())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
  CHECK(m.translation.norm() == 0.0);
}

TEST_CASE("transform basics and the group law") {
  const RigidMotion id;
  const Vec3 p(0.3, -1.2, 2.0);
  CHECK(transform(id, p) == p);

  RigidMotion shift;
  shift.translation = Vec3(1, 2, 3);
  CHECK(transform(shift, Vec3::Zero()) == Vec3(1, 2, 3));

  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const RigidMotion m1 = exp_twist(random_twist(rng));
    const RigidMotion m2 = exp_twist(random_twist(rng));
    const Vec3 q(0.5, 0.7, -0.2);
    const Vec3 a = transform(m2, transform(m1, q));
    const Vec3 b = transform(m2.compose(m1), q);
    CHECK((a - b).norm() <= 1e-12);
  }
}

TEST_CASE("small twists reproduce the velocity -omega x p - t") {
  std::mt19937_64 rng(11);
  const double dt = 1e-6;
  for (int k = 0; k < 500; ++k) {
    const Twist xi = random_twist(rng);
    const Vec3 p(2.0, 0.5, -0.4);
    const Vec3 moved = transform(exp_twist(xi * dt), p);
    const Vec3 fd = (moved - p) / dt;
    const Vec3 expected = -xi.omega.cross(p) - xi.t;
    CHECK((fd - expected).norm() <= 1e-4 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("inverses compose to the identity") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 200; ++k) {
    const RigidMotion m = exp_twist(random_twist(rng));
    const RigidMotion round = m.compose(m.inverse());
    CHECK((round.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(round.translation.norm() <= 1e-9);
  }
}

TEST_CASE("rigid motion validation rejects a sheared matrix") {
  RigidMotion m;
  m.rotation(0, 1) = 0.5;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  RigidMotion ok = exp_twist({Vec3(0.1, 0, 0), Vec3(0.2, 0.1, -0.3)});
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("sensor config invariants and resolutions") {
  SensorConfig cfg;  // ARIS-like default profile
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.range_resolution() == doctest::Approx(0.003).epsilon(1e-12));
  CHECK(rad2deg(cfg.elevation_aperture) == doctest::Approx(14.0));
  CHECK(cfg.tangential_resolution(3.5) == doctest::Approx(0.0143).epsilon(2e-3));

  SensorConfig bad = cfg;
  bad.r_min = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.r_max = bad.r_min;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.n_range = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("sensor config JSON stores degrees") {
  SensorConfig cfg;
  cfg.azimuth_fov = deg2rad(30.0);
  cfg.elevation_aperture = deg2rad(14.0);
  const std::string text = cfg.to_json();
  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("azimuth_fov").get<double>() == doctest::Approx(30.0));
  CHECK(j.at("elevation_aperture").get<double>() == doctest::Approx(14.0));

  const SensorConfig back = SensorConfig::from_json(text);
  CHECK(back.azimuth_fov == doctest::Approx(cfg.azimuth_fov).epsilon(1e-12));
  CHECK(back.n_range == cfg.n_range);
}

TEST_CASE("grid coordinate helpers invert each other") {
  SensorConfig cfg;
  for (int i : {0, 1, 699, 1399}) {
    CHECK(cfg.row_of_range(cfg.range_of_row(i)) == doctest::Approx(i).epsilon(1e-10));
  }
  for (int j : {0, 64, 127}) {
    CHECK(cfg.col_of_theta(cfg.theta_of_col(j)) == doctest::Approx(j).epsilon(1e-10));
  }
}
