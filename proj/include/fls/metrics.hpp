// Evaluation metrics: elevation MAE, Chamfer distance and threshold f-score.

#ifndef FLS_METRICS_HPP
#define FLS_METRICS_HPP

#include <map>
#include <string>
#include <vector>

#include "fls/image.hpp"

namespace fls {

struct MaeResult {
  double mean = 0.0;    // masked mean |error| [rad] over jointly valid pixels
  double scaled = 0.0;  // beta / (H W) * sum |error|
  size_t pixels = 0;
};

/// Elevation MAE over jointly valid pixels. The masked mean in radians is
/// the primary value; the beta/(HW)-scaled sum is reported alongside.
/// Throws std::invalid_argument when no pixel is jointly valid.
MaeResult mae(const ElevationMap& estimate, const ElevationMap& reference,
              double beta = 1000.0);

/// Chamfer distance: nu-scaled symmetric mean of squared nearest-neighbor
/// distances. Throws on an empty set.
double chamfer(const PointCloud& s1, const PointCloud& s2, double nu = 500.0);

/// Harmonic mean of precision and recall of point distances under the
/// threshold, in percent. Throws on an empty set or threshold <= 0.
double f_score(const PointCloud& estimate, const PointCloud& reference,
               double threshold);

struct EvalResult {
  MaeResult mae;
  double cd = 0.0;
  std::map<double, double> f_scores;  // threshold [m] -> percent

  std::string to_json() const;
};

EvalResult evaluate(const ElevationMap& estimate, const ElevationMap& reference,
                    const PointCloud& est_cloud, const PointCloud& ref_cloud,
                    const std::vector<double>& thresholds = {0.001, 0.003},
                    double beta = 1000.0, double nu = 500.0);

}  // namespace fls

#endif  // FLS_METRICS_HPP
