// Per-triplet variational elevation estimation: adaptive first-order descent
// on free per-pixel logits whose sigmoid maps strictly into the aperture.

#ifndef FLS_ESTIMATOR_HPP
#define FLS_ESTIMATOR_HPP

#include <vector>

#include "fls/geometry.hpp"
#include "fls/image.hpp"
#include "fls/loss.hpp"

namespace fls {

/// Unbounded per-pixel logits u with phi = aperture * (sigmoid(u) - 1/2),
/// so the mapped angle is always strictly inside the aperture. u = 0 maps
/// to phi = 0, the symmetric uninformed prior.
struct ElevParam {
  GridD u;
  double aperture = 0.0;

  ElevParam() = default;
  ElevParam(int h, int w, double aperture_)
      : u(h, w, 0.0), aperture(aperture_) {}

  double phi_at(size_t k) const;
  double dphi_du_at(size_t k) const;
  ElevationMap to_map(const GridB& valid) const;
};

struct OptConfig {
  double step = 0.05;        // on logits
  double beta1 = 0.9;        // first-moment decay
  double beta2 = 0.999;      // second-moment decay
  double epsilon = 1e-8;
  int iterations = 500;
  // Stop when the relative loss decrease over a 10-iteration window falls
  // below this; 0 disables early stopping.
  double tolerance = 0.0;
  LossOptions loss;

  // Estimation excludes mask-boundary smoothness terms by default: the
  // masked map jumps to zero outside the mask, which would penalize any
  // non-flat solution at the boundary pixels.
  OptConfig() { loss.exclude_mask_boundary = true; }

  void validate() const;
};

struct SourceView {
  const PolarImage* image = nullptr;
  RigidMotion motion;  // M_{t->s}
};

struct EstimationReport {
  ElevationMap elevation;             // mapped phi at the best-loss iterate
  std::vector<double> loss_trajectory;
  int iterations_used = 0;
  int best_iteration = 0;
  double initial_loss = 0.0;
  double best_loss = 0.0;
  std::vector<double> in_bounds_fraction;  // per source, at the best iterate
  bool degenerate = false;  // relative loss decrease below 5%

  std::string trajectory_csv() const;
};

/// Minimize the total loss of 1..2 source views over the logits. Gradients
/// are averaged over sources; the smoothness term enters once. Iteration
/// zero returns the phi = 0 initialization. Throws on an empty mask; aborts
/// with a diagnostic on non-finite loss.
EstimationReport estimate(const PolarImage& target,
                          const std::vector<SourceView>& sources,
                          const SignalMask& mask, const OptConfig& opt = {});

/// Backproject every valid pixel of an elevation map through the sensor
/// grid. The declared frame is the sensor frame of the config.
PointCloud elevation_to_pointcloud(const ElevationMap& map,
                                   const SensorConfig& config);

}  // namespace fls

#endif  // FLS_ESTIMATOR_HPP
