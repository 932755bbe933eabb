#include "fls/warp.hpp"

#include <cmath>
#include <stdexcept>

namespace fls {

double WarpResult::in_bounds_fraction() const {
  if (in_bounds.data.empty()) return 0.0;
  size_t n = 0;
  for (uint8_t v : in_bounds.data) n += (v != 0);
  return double(n) / double(in_bounds.data.size());
}

double bilinear_sample(const GridD& img, double row, double col) {
  if (row < 0.0 || col < 0.0 || row > img.h - 1 || col > img.w - 1) return 0.0;
  int i0 = int(row), j0 = int(col);
  if (i0 == img.h - 1) --i0;
  if (j0 == img.w - 1) --j0;
  const double ai = row - i0, aj = col - j0;
  const double v00 = img.at(i0, j0), v01 = img.at(i0, j0 + 1);
  const double v10 = img.at(i0 + 1, j0), v11 = img.at(i0 + 1, j0 + 1);
  return v00 * (1 - ai) * (1 - aj) + v01 * (1 - ai) * aj +
         v10 * ai * (1 - aj) + v11 * ai * aj;
}

WarpResult inverse_warp(const ElevationMap& target_elevation,
                        const PolarImage& source, const RigidMotion& motion,
                        bool with_jacobian) {
  const SensorConfig& cfg = source.config;
  const int h = source.h(), w = source.w();
  if (!target_elevation.phi.same_shape(h, w))
    throw std::invalid_argument("inverse_warp: elevation/image shape mismatch");

  WarpResult out;
  out.synth = GridD(h, w, 0.0);
  out.in_bounds = GridB(h, w, 0);
  out.jacobian = GridD(h, w, 0.0);
  out.sample_row = GridD(h, w, -1.0);
  out.sample_col = GridD(h, w, -1.0);

  // Identity motion samples at the exact grid nodes; short-circuit so the
  // reproduction is bitwise and the jacobian is exactly zero (the sample
  // location is independent of phi when r_s = r_t, theta_s = theta_t).
  if (motion.is_identity()) {
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        if (!target_elevation.valid.at(i, j)) continue;
        out.synth.at(i, j) = source.intensity.at(i, j);
        out.in_bounds.at(i, j) = 1;
        out.sample_row.at(i, j) = double(i);
        out.sample_col.at(i, j) = double(j);
      }
    return out;
  }

  const double rho = cfg.range_resolution();
  const double dtheta = cfg.azimuth_fov / cfg.n_azimuth;

  for (int i = 0; i < h; ++i) {
    const double r_t = cfg.range_of_row(i);
    for (int j = 0; j < w; ++j) {
      if (!target_elevation.valid.at(i, j)) continue;
      const double theta_t = cfg.theta_of_col(j);
      const double phi_t = target_elevation.phi.at(i, j);
      const double cp = std::cos(phi_t), sp = std::sin(phi_t);
      const double ct = std::cos(theta_t), st = std::sin(theta_t);
      const Vec3 p_t(r_t * cp * ct, r_t * cp * st, r_t * sp);
      const Vec3 p_s = motion.apply(p_t);
      const double r_s = p_s.norm();
      if (r_s <= 0.0) continue;
      const double theta_s = std::atan2(p_s.y(), p_s.x());
      const double row = cfg.row_of_range(r_s);
      const double col = cfg.col_of_theta(theta_s);
      out.sample_row.at(i, j) = row;
      out.sample_col.at(i, j) = col;
      if (row < 0.0 || col < 0.0 || row > h - 1 || col > w - 1) continue;
      out.in_bounds.at(i, j) = 1;
      out.synth.at(i, j) = bilinear_sample(source.intensity, row, col);

      if (!with_jacobian) continue;
      // d p_t / d phi, then chain through the motion, the re-polarization
      // and the bilinear kernel.
      const Vec3 dp_t(-r_t * sp * ct, -r_t * sp * st, r_t * cp);
      const Vec3 dp_s = motion.rotation * dp_t;
      const double dr_s = p_s.dot(dp_s) / r_s;
      const double xy2 = p_s.x() * p_s.x() + p_s.y() * p_s.y();
      if (xy2 <= 0.0) continue;
      const double dtheta_s =
          (p_s.x() * dp_s.y() - p_s.y() * dp_s.x()) / xy2;
      const double drow = dr_s / rho;
      const double dcol = dtheta_s / dtheta;

      int i0 = int(row), j0 = int(col);
      if (i0 == h - 1) --i0;
      if (j0 == w - 1) --j0;
      const double ai = row - i0, aj = col - j0;
      const GridD& src = source.intensity;
      const double v00 = src.at(i0, j0), v01 = src.at(i0, j0 + 1);
      const double v10 = src.at(i0 + 1, j0), v11 = src.at(i0 + 1, j0 + 1);
      const double d_drow = (v10 - v00) * (1 - aj) + (v11 - v01) * aj;
      const double d_dcol = (v01 - v00) * (1 - ai) + (v11 - v10) * ai;
      out.jacobian.at(i, j) = d_drow * drow + d_dcol * dcol;
    }
  }
  return out;
}

}  // namespace fls
