#include "fls/estimator.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "fls/warp.hpp"

namespace fls {

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

double ElevParam::phi_at(size_t k) const {
  return aperture * (sigmoid(u.data[k]) - 0.5);
}

double ElevParam::dphi_du_at(size_t k) const {
  const double s = sigmoid(u.data[k]);
  return aperture * s * (1.0 - s);
}

ElevationMap ElevParam::to_map(const GridB& valid) const {
  ElevationMap map(u.h, u.w);
  map.valid = valid;
  for (size_t k = 0; k < u.data.size(); ++k) map.phi.data[k] = phi_at(k);
  return map;
}

void OptConfig::validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("OptConfig: step must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
    throw std::invalid_argument("OptConfig: decays must be in (0,1)");
  if (iterations < 0)
    throw std::invalid_argument("OptConfig: iteration budget must be >= 0");
}

std::string EstimationReport::trajectory_csv() const {
  std::string out = "iteration,total_loss\n";
  char line[64];
  for (size_t k = 0; k < loss_trajectory.size(); ++k) {
    std::snprintf(line, sizeof(line), "%zu,%.12g\n", k, loss_trajectory[k]);
    out += line;
  }
  return out;
}

EstimationReport estimate(const PolarImage& target,
                          const std::vector<SourceView>& sources,
                          const SignalMask& mask, const OptConfig& opt) {
  opt.validate();
  if (sources.empty() || sources.size() > 2)
    throw std::invalid_argument("estimate: expected 1 or 2 source views");
  const int h = target.h(), w = target.w();
  if (mask.h() != h || mask.w() != w)
    throw std::invalid_argument("estimate: mask shape mismatch");
  for (const SourceView& s : sources)
    if (!s.image || s.image->h() != h || s.image->w() != w)
      throw std::invalid_argument("estimate: source shape mismatch");
  if (mask.count() == 0) throw std::invalid_argument("estimate: empty mask");

  const double aperture = target.config.elevation_aperture;
  ElevParam param(h, w, aperture);
  const size_t n = param.u.data.size();

  // Adam state on the logits.
  GridD m(h, w, 0.0), v(h, w, 0.0);

  EstimationReport report;
  GridD best_u = param.u;
  double best_loss = std::numeric_limits<double>::infinity();

  auto eval = [&](GridD* grad_u, std::vector<double>* inb) {
    const ElevationMap elev = param.to_map(mask.valid);
    double loss = 0.0;
    if (grad_u) grad_u->data.assign(n, 0.0);
    const double source_weight = 1.0 / double(sources.size());
    for (const SourceView& s : sources) {
      const WarpResult warp =
          inverse_warp(elev, *s.image, s.motion, grad_u != nullptr);
      const LossBreakdown lb =
          total_loss(target.intensity, warp, elev, mask.valid, opt.loss);
      loss += source_weight * lb.total;
      if (grad_u)
        for (size_t k = 0; k < n; ++k)
          grad_u->data[k] += source_weight * lb.grad_total.data[k];
      if (inb) inb->push_back(warp.in_bounds_fraction());
    }
    if (grad_u)
      for (size_t k = 0; k < n; ++k) grad_u->data[k] *= param.dphi_du_at(k);
    return loss;
  };

  GridD grad(h, w, 0.0);
  int iter = 0;
  for (; iter < opt.iterations; ++iter) {
    const double loss = eval(&grad, nullptr);
    if (!std::isfinite(loss))
      throw std::runtime_error("estimate: non-finite loss at iteration " +
                               std::to_string(iter));
    report.loss_trajectory.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best_u = param.u;
      report.best_iteration = iter;
    }

    const double bc1 = 1.0 - std::pow(opt.beta1, iter + 1);
    const double bc2 = 1.0 - std::pow(opt.beta2, iter + 1);
    for (size_t k = 0; k < n; ++k) {
      m.data[k] = opt.beta1 * m.data[k] + (1.0 - opt.beta1) * grad.data[k];
      v.data[k] =
          opt.beta2 * v.data[k] + (1.0 - opt.beta2) * grad.data[k] * grad.data[k];
      const double m_hat = m.data[k] / bc1;
      const double v_hat = v.data[k] / bc2;
      param.u.data[k] -= opt.step * m_hat / (std::sqrt(v_hat) + opt.epsilon);
    }

    if (opt.tolerance > 0.0 && report.loss_trajectory.size() >= 11) {
      const double prev =
          report.loss_trajectory[report.loss_trajectory.size() - 11];
      if (prev > 0.0 && (prev - loss) / prev < opt.tolerance) {
        ++iter;
        break;
      }
    }
  }

  // Final loss at the last iterate (also covers the zero-iteration case).
  {
    const double loss = eval(nullptr, nullptr);
    report.loss_trajectory.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best_u = param.u;
      report.best_iteration = iter;
    }
  }

  param.u = best_u;
  report.iterations_used = iter;
  report.initial_loss = report.loss_trajectory.front();
  report.best_loss = best_loss;
  report.elevation = param.to_map(mask.valid);
  std::vector<double> inb;
  eval(nullptr, &inb);
  report.in_bounds_fraction = inb;
  report.degenerate =
      report.initial_loss > 0.0 &&
      (report.initial_loss - best_loss) / report.initial_loss < 0.05;
  return report;
}

PointCloud elevation_to_pointcloud(const ElevationMap& map,
                                   const SensorConfig& config) {
  if (!map.phi.same_shape(config.n_range, config.n_azimuth))
    throw std::invalid_argument(
        "elevation_to_pointcloud: map/config shape mismatch");
  PointCloud cloud;
  for (int i = 0; i < map.h(); ++i) {
    const double r = config.range_of_row(i);
    for (int j = 0; j < map.w(); ++j) {
      if (!map.valid.at(i, j)) continue;
      cloud.points.push_back(
          backproject({r, config.theta_of_col(j), map.phi.at(i, j)}));
    }
  }
  return cloud;
}

}  // namespace fls
