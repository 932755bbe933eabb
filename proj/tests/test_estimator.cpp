#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fls/estimator.hpp"
#include "fls/mask.hpp"
#include "fls/simulator.hpp"

using namespace fls;

namespace {

SensorConfig test_config() {
  SensorConfig cfg;
  cfg.r_min = 1.0;
  cfg.r_max = 5.0;
  cfg.n_range = 96;
  cfg.n_azimuth = 48;
  return cfg;
}

struct Triplet {
  RenderResult target;
  RenderResult past;
  RenderResult future;
  RigidMotion to_past;
  RigidMotion to_future;
};

Triplet make_triplet(uint64_t seed, const Twist& xi, const SensorConfig& cfg) {
  TerrainParams params;
  params.grid = 256;
  const Terrain terrain = gen_terrain(seed, params);
  RigidMotion pose;
  pose.translation = Vec3(0, 0, terrain.height(0, 0) + 0.35);
  Mat3 ry;
  const double a = deg2rad(8.5);
  ry << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  pose.rotation = ry;

  RenderOptions opts;
  opts.n_phi = 192;
  opts.march_step = 0.015;

  Triplet t;
  t.target = render(terrain, pose, cfg, opts);
  t.past = render(terrain, pose.compose(exp_twist(xi)), cfg, opts);
  t.future = render(terrain, pose.compose(exp_twist(-xi)), cfg, opts);
  t.to_past = exp_twist(-xi);
  t.to_future = exp_twist(xi);
  return t;
}

double masked_mae(const ElevationMap& est, const ElevationMap& gt) {
  double sum = 0.0;
  size_t n = 0;
  for (size_t k = 0; k < est.phi.data.size(); ++k) {
    if (!est.valid.data[k] || !gt.valid.data[k]) continue;
    sum += std::abs(est.phi.data[k] - gt.phi.data[k]);
    ++n;
  }
  REQUIRE(n > 0);
  return sum / double(n);
}

}  // namespace

TEST_CASE("zero iterations return the phi = 0 initialization") {
  const SensorConfig cfg = test_config();
  Twist xi;
  xi.omega = Vec3(deg2rad(7.0), 0, 0);
  const Triplet t = make_triplet(41, xi, cfg);
  const SignalMask mask = binarize(t.target.image);
  OptConfig opt;
  opt.iterations = 0;
  const EstimationReport rep = estimate(
      t.target.image, {{&t.past.image, t.to_past}, {&t.future.image, t.to_future}},
      mask, opt);
  CHECK(rep.iterations_used == 0);
  for (size_t k = 0; k < rep.elevation.phi.data.size(); ++k)
    CHECK(rep.elevation.phi.data[k] == 0.0);
  CHECK(rep.elevation.valid_count() == mask.count());
}

TEST_CASE("roll triplet: elevation is recovered well below the zero baseline") {
  const SensorConfig cfg = test_config();
  Twist xi;
  xi.omega = Vec3(deg2rad(7.0), 0, 0);
  const Triplet t = make_triplet(42, xi, cfg);
  const SignalMask mask = binarize(t.target.image);
  REQUIRE(mask.count() > 500);

  OptConfig opt;
  opt.iterations = 200;
  const EstimationReport rep = estimate(
      t.target.image, {{&t.past.image, t.to_past}, {&t.future.image, t.to_future}},
      mask, opt);

  // Loss collapses on an effective motion.
  CHECK(rep.best_loss < 0.5 * rep.initial_loss);
  CHECK(!rep.degenerate);

  const double mae_est = masked_mae(rep.elevation, t.target.elevation);
  ElevationMap zero(cfg.n_range, cfg.n_azimuth);
  zero.valid = rep.elevation.valid;
  const double mae_zero = masked_mae(zero, t.target.elevation);
  CHECK(mae_est < 0.05);
  CHECK(mae_est < 0.6 * mae_zero);

  // Feasibility: the sigmoid parameterization keeps phi strictly inside.
  for (size_t k = 0; k < rep.elevation.phi.data.size(); ++k)
    CHECK(std::abs(rep.elevation.phi.data[k]) < cfg.phi_half());

  // The returned trajectory is recorded per iteration plus the final point.
  CHECK(rep.loss_trajectory.size() == size_t(rep.iterations_used) + 1);
}

TEST_CASE("x-translation triplet: flat loss landscape, no learning") {
  const SensorConfig cfg = test_config();
  Twist xi;
  xi.t = Vec3(0.1, 0, 0);
  const Triplet t = make_triplet(43, xi, cfg);
  const SignalMask mask = binarize(t.target.image);

  OptConfig opt;
  opt.iterations = 200;
  const EstimationReport rep = estimate(
      t.target.image, {{&t.past.image, t.to_past}, {&t.future.image, t.to_future}},
      mask, opt);

  CHECK(rep.degenerate);  // loss decrease < 5%
  const double mae_est = masked_mae(rep.elevation, t.target.elevation);
  ElevationMap zero(cfg.n_range, cfg.n_azimuth);
  zero.valid = rep.elevation.valid;
  const double mae_zero = masked_mae(zero, t.target.elevation);
  CHECK(std::abs(mae_est - mae_zero) <= 0.15 * mae_zero);
}

TEST_CASE("two sources never lag the better single source by more than 10%") {
  const SensorConfig cfg = test_config();
  Twist xi;
  xi.omega = Vec3(deg2rad(6.0), 0, 0);
  const Triplet t = make_triplet(44, xi, cfg);
  const SignalMask mask = binarize(t.target.image);
  OptConfig opt;
  opt.iterations = 120;

  const EstimationReport both = estimate(
      t.target.image, {{&t.past.image, t.to_past}, {&t.future.image, t.to_future}},
      mask, opt);
  const EstimationReport only_past =
      estimate(t.target.image, {{&t.past.image, t.to_past}}, mask, opt);
  const EstimationReport only_future =
      estimate(t.target.image, {{&t.future.image, t.to_future}}, mask, opt);
  const double best_single = std::min(only_past.best_loss, only_future.best_loss);
  CHECK(both.best_loss <= 1.1 * best_single);
}

TEST_CASE("estimation is deterministic") {
  const SensorConfig cfg = test_config();
  Twist xi;
  xi.omega = Vec3(deg2rad(6.0), 0, 0);
  const Triplet t = make_triplet(45, xi, cfg);
  const SignalMask mask = binarize(t.target.image);
  OptConfig opt;
  opt.iterations = 40;
  const EstimationReport a = estimate(t.target.image, {{&t.past.image, t.to_past}},
                                      mask, opt);
  const EstimationReport b = estimate(t.target.image, {{&t.past.image, t.to_past}},
                                      mask, opt);
  for (size_t k = 0; k < a.elevation.phi.data.size(); ++k)
    CHECK(a.elevation.phi.data[k] == b.elevation.phi.data[k]);
  CHECK(a.loss_trajectory == b.loss_trajectory);
}

TEST_CASE("estimate rejects an empty mask and bad optimizer settings") {
  const SensorConfig cfg = test_config();
  PolarImage img(cfg);
  SignalMask empty(cfg.n_range, cfg.n_azimuth);
  RigidMotion id;
  CHECK_THROWS_AS(estimate(img, {{&img, id}}, empty, OptConfig{}),
                  std::invalid_argument);
  OptConfig bad;
  bad.step = 0.0;
  SignalMask ok(cfg.n_range, cfg.n_azimuth, 1);
  CHECK_THROWS_AS(estimate(img, {{&img, id}}, ok, bad), std::invalid_argument);
  CHECK_THROWS_AS(estimate(img, {}, ok, OptConfig{}), std::invalid_argument);
}

TEST_CASE("elevation_to_pointcloud basics and simulator consistency") {
  SensorConfig cfg = test_config();

  // All-zero map gives a planar cloud at z = 0.
  ElevationMap flat(cfg.n_range, cfg.n_azimuth);
  for (uint8_t& v : flat.valid.data) v = 1;
  const PointCloud planar = elevation_to_pointcloud(flat, cfg);
  CHECK(planar.size() == size_t(cfg.n_range) * cfg.n_azimuth);
  for (const Vec3& p : planar.points) CHECK(std::abs(p.z()) <= 1e-15);

  // Empty validity mask gives an empty cloud.
  ElevationMap none(cfg.n_range, cfg.n_azimuth);
  CHECK(elevation_to_pointcloud(none, cfg).empty());

  // The ground-truth map backprojects close to the rendered hit cloud.
  Twist xi;
  const Triplet t = make_triplet(46, xi, cfg);
  const PointCloud from_map = elevation_to_pointcloud(t.target.elevation, cfg);
  REQUIRE(!from_map.empty());
  const double rho = cfg.range_resolution();
  const double gamma = cfg.tangential_resolution(cfg.r_max);
  const double phi_pitch = cfg.elevation_aperture / 192;
  const double bound = std::sqrt(rho * rho + gamma * gamma +
                                 std::pow(cfg.r_max * 3 * phi_pitch, 2));
  double worst = 0.0;
  for (size_t k = 0; k < from_map.size(); k += 7) {
    double best = 1e9;
    for (const Vec3& q : t.target.cloud.points)
      best = std::min(best, (from_map.points[k] - q).norm());
    worst = std::max(worst, best);
  }
  CHECK(worst <= bound);
}
