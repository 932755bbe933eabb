#include "fls/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fls {

namespace {

struct Hit {
  bool ok = false;
  double range = 0.0;
  double lambert = 0.0;
  Vec3 point_sensor = Vec3::Zero();
};

Hit raycast(const Terrain& terrain, const Vec3& origin, const Vec3& dir_world,
            const Vec3& dir_sensor, const SensorConfig& config,
            const RenderOptions& opts) {
  Hit hit;
  auto above = [&](double s) {
    const Vec3 p = origin + s * dir_world;
    return p.z() - terrain.height(p.x(), p.y());
  };
  double s0 = config.r_min;
  double f0 = above(s0);
  if (f0 <= 0.0) return hit;  // starts inside terrain; treat as miss
  while (s0 < config.r_max) {
    const double s1 = std::min(s0 + opts.march_step, config.r_max);
    const double f1 = above(s1);
    if (f1 <= 0.0) {
      // Bisection refine on [s0, s1].
      double lo = s0, hi = s1;
      for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (above(mid) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      const double s = 0.5 * (lo + hi);
      const Vec3 p = origin + s * dir_world;
      const Vec3 n = terrain.normal(p.x(), p.y());
      double lam = std::max(0.0, -dir_world.dot(n)) * terrain.albedo(p.x(), p.y());
      if (opts.spreading_loss) lam /= s * s;
      hit.ok = true;
      hit.range = s;
      hit.lambert = lam;
      hit.point_sensor = dir_sensor * s;
      return hit;
    }
    if (s1 >= config.r_max) break;
    s0 = s1;
    f0 = f1;
  }
  return hit;
}

// One contiguous surface trace inside one range bin. Its shading value is
// the mean Lambertian factor times the fraction of the bin's range extent
// the trace covers, which depends on the geometry alone rather than on the
// elevation sampling density.
struct Run {
  double weight = 0.0;         // phi measure of the pieces
  double lambert_weight = 0.0; // integral of lambert over phi
  double phi_weight = 0.0;     // integral of lambert * phi over phi
  double r_lo = std::numeric_limits<double>::infinity();
  double r_hi = -std::numeric_limits<double>::infinity();
  double last_phi = -std::numeric_limits<double>::infinity();

  double coverage(double rho) const {
    return weight > 0.0 ? std::min(1.0, (r_hi - r_lo) / rho) : 0.0;
  }
  double shade(double rho) const {
    return weight > 0.0 ? (lambert_weight / weight) * coverage(rho) : 0.0;
  }
  double mean_phi() const {
    return lambert_weight > 0.0 ? phi_weight / lambert_weight
                                : (weight > 0.0 ? last_phi : 0.0);
  }
};

struct BinState {
  Run current;
  double best_shade = -1.0;
  double best_phi = 0.0;
  double total_shade = 0.0;
  int runs = 0;
  bool any = false;

  void close_run(double rho) {
    if (current.weight > 0.0) {
      const double s = current.shade(rho);
      total_shade += s;
      if (s > best_shade) {
        best_shade = s;
        best_phi = current.mean_phi();
      }
      ++runs;
    }
    current = Run{};
  }

  void deposit(double w, double lambert, double phi_lo, double phi_hi,
               double r_lo, double r_hi, double gap, double rho) {
    if (current.weight > 0.0 && phi_lo - current.last_phi > gap)
      close_run(rho);
    current.weight += w;
    current.lambert_weight += lambert * w;
    current.phi_weight += lambert * w * 0.5 * (phi_lo + phi_hi);
    current.r_lo = std::min(current.r_lo, r_lo);
    current.r_hi = std::max(current.r_hi, r_hi);
    current.last_phi = phi_hi;
    any = true;
  }
};

}  // namespace

RenderResult render(const Terrain& terrain, const RigidMotion& pose,
                    const SensorConfig& config, const RenderOptions& opts) {
  config.validate();
  const int h = config.n_range, w = config.n_azimuth;
  RenderResult out;
  out.image = PolarImage(config);
  out.image.pose = pose;
  out.elevation = ElevationMap(h, w);
  const double rho = config.range_resolution();
  const double phi_step = config.elevation_aperture / opts.n_phi;
  const double gap = 2.5 * phi_step;
  const Vec3 origin = pose.translation;

  std::vector<Hit> hits(static_cast<size_t>(opts.n_phi) + 1);
  std::vector<BinState> bins(static_cast<size_t>(h));
  const int subs = std::max(1, opts.azimuth_supersample);
  const double beam_pitch = config.azimuth_fov / config.n_azimuth;

  // Per-column accumulation across sub-beams.
  std::vector<double> col_shade(static_cast<size_t>(h));
  std::vector<double> col_phi_weight(static_cast<size_t>(h));
  std::vector<double> col_phi_shade(static_cast<size_t>(h));
  std::vector<int> col_runs(static_cast<size_t>(h));
  std::vector<uint8_t> col_any(static_cast<size_t>(h));

  for (int j = 0; j < w; ++j) {
    std::fill(col_shade.begin(), col_shade.end(), 0.0);
    std::fill(col_phi_weight.begin(), col_phi_weight.end(), 0.0);
    std::fill(col_phi_shade.begin(), col_phi_shade.end(), 0.0);
    std::fill(col_runs.begin(), col_runs.end(), 0);
    std::fill(col_any.begin(), col_any.end(), uint8_t(0));

    for (int sub = 0; sub < subs; ++sub) {
    const double theta = config.theta_of_col(j) +
                         ((sub + 0.5) / subs - 0.5) * beam_pitch;
    const double ct = std::cos(theta), st = std::sin(theta);
    for (int k = 0; k <= opts.n_phi; ++k) {
      const double phi = -config.phi_half() + k * phi_step;
      const Vec3 d(std::cos(phi) * ct, std::cos(phi) * st, std::sin(phi));
      hits[k] = raycast(terrain, origin, pose.rotation * d, d, config, opts);
      if (hits[k].ok && sub == 0) out.cloud.points.push_back(hits[k].point_sensor);
    }
    std::fill(bins.begin(), bins.end(), BinState{});

    auto splat = [&](double r_lo, double r_hi, double phi_lo, double phi_hi,
                     double lambert) {
      // Distribute one surface segment across the range bins its span
      // overlaps, keeping the per-bin range extent for coverage shading.
      if (r_hi - r_lo < 1e-12) {
        const int b = int(std::floor((0.5 * (r_lo + r_hi) - config.r_min) / rho));
        if (b >= 0 && b < h)
          bins[size_t(b)].deposit(std::abs(phi_hi - phi_lo), lambert,
                                  std::min(phi_lo, phi_hi),
                                  std::max(phi_lo, phi_hi), r_lo, r_hi, gap,
                                  rho);
        return;
      }
      const double span = r_hi - r_lo;
      const double phi_measure = std::abs(phi_hi - phi_lo);
      int b0 = std::max(0, int(std::floor((r_lo - config.r_min) / rho)));
      int b1 = std::min(h - 1, int(std::floor((r_hi - config.r_min) / rho)));
      for (int b = b0; b <= b1; ++b) {
        const double bin_lo = config.r_min + b * rho;
        const double bin_hi = bin_lo + rho;
        const double o_lo = std::max(r_lo, bin_lo);
        const double o_hi = std::min(r_hi, bin_hi);
        if (o_hi <= o_lo) continue;
        const double frac = (o_hi - o_lo) / span;
        const double u_lo = (o_lo - r_lo) / span, u_hi = (o_hi - r_lo) / span;
        const double p_lo = phi_lo + (phi_hi - phi_lo) * u_lo;
        const double p_hi = phi_lo + (phi_hi - phi_lo) * u_hi;
        bins[size_t(b)].deposit(phi_measure * frac, lambert,
                                std::min(p_lo, p_hi), std::max(p_lo, p_hi),
                                o_lo, o_hi, gap, rho);
      }
    };

    for (int k = 0; k < opts.n_phi; ++k) {
      const Hit& a = hits[k];
      const Hit& b = hits[k + 1];
      const double phi_a = -config.phi_half() + k * phi_step;
      const double phi_b = phi_a + phi_step;
      const bool contiguous =
          a.ok && b.ok && std::abs(a.range - b.range) <= opts.continuity_threshold;
      if (contiguous) {
        const double lam = 0.5 * (a.lambert + b.lambert);
        if (a.range <= b.range)
          splat(a.range, b.range, phi_a, phi_b, lam);
        else
          splat(b.range, a.range, phi_b, phi_a, lam);
      } else {
        // Endpoints at occlusion boundaries keep their hit as a point
        // deposit so they stay represented in validity and the cloud.
        if (a.ok && (k == 0 || !hits[k - 1].ok ||
                     std::abs(hits[k - 1].range - a.range) >
                         opts.continuity_threshold))
          splat(a.range, a.range, phi_a - 0.5 * phi_step, phi_a + 0.5 * phi_step,
                a.lambert);
        if (b.ok && k + 1 == opts.n_phi)
          splat(b.range, b.range, phi_b - 0.5 * phi_step, phi_b + 0.5 * phi_step,
                b.lambert);
      }
    }

    for (int i = 0; i < h; ++i) {
      BinState& bs = bins[size_t(i)];
      bs.close_run(rho);
      if (!bs.any) continue;
      col_shade[size_t(i)] += bs.total_shade;
      // Dominant-return phi blended across sub-beams, weighted by shade.
      col_phi_weight[size_t(i)] += std::max(bs.best_shade, 1e-12);
      col_phi_shade[size_t(i)] +=
          std::max(bs.best_shade, 1e-12) * bs.best_phi;
      col_runs[size_t(i)] = std::max(col_runs[size_t(i)], bs.runs);
      col_any[size_t(i)] = 1;
    }
    }  // sub-beams

    for (int i = 0; i < h; ++i) {
      if (!col_any[size_t(i)]) continue;
      out.image.intensity.at(i, j) = std::clamp(
          opts.intensity_scale * col_shade[size_t(i)] / subs, 0.0, 1.0);
      out.elevation.phi.at(i, j) =
          col_phi_shade[size_t(i)] / col_phi_weight[size_t(i)];
      out.elevation.valid.at(i, j) = 1;
      if (col_runs[size_t(i)] > 1) ++out.multi_hit_pixels;
    }
  }
  return out;
}

double coverage_fraction(const Terrain& terrain, const RigidMotion& pose,
                         const SensorConfig& config, const RenderOptions& opts) {
  const RenderResult r = render(terrain, pose, config, opts);
  return double(r.elevation.valid_count()) /
         double(config.n_range * config.n_azimuth);
}

}  // namespace fls
