// End-to-end runs wiring the modules together: dataset generation, motion
// analysis, per-triplet estimation and batch evaluation. The CLI subcommands
// are thin wrappers over these.

#ifndef FLS_PIPELINE_HPP
#define FLS_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "fls/dataset.hpp"
#include "fls/estimator.hpp"
#include "fls/metrics.hpp"
#include "fls/motion_field.hpp"

namespace fls {

struct EstimateOptions {
  std::string split = "test";  // train | val | test | all
  OptConfig opt;
  double mask_threshold = 0.05;
  int mask_min_component = 8;
  int jobs = 0;  // 0: hardware concurrency
};

struct TripletOutcome {
  std::string target_id;
  bool ok = false;
  std::string error;
  double initial_loss = 0.0;
  double best_loss = 0.0;
  bool degenerate = false;
  double mae_vs_gt = -1.0;       // masked mean [rad], -1 when GT is absent
  double mae_zero_baseline = -1.0;
};

/// Run the estimator over every triplet of the manifest's split. Per triplet
/// writes <target>.elev, <target>_cloud.ply, <target>_loss.csv and
/// <target>_report.json under out_dir, plus a summary.json. Per-item
/// failures are recorded, not thrown.
std::vector<TripletOutcome> run_estimate(const std::string& dataset_dir,
                                         const std::string& out_dir,
                                         const EstimateOptions& opts);

struct FrameEval {
  std::string id;
  EvalResult result;
};

/// Evaluate predicted maps/clouds in pred_dir against ground truth in
/// gt_dir (frame files as written by gen_dataset). Ids present on only one
/// side are listed in `skipped`. Writes metrics.csv (one row per frame) and
/// metrics.json under pred_dir. Throws when no id matches.
std::vector<FrameEval> run_eval(const std::string& pred_dir,
                                const std::string& gt_dir,
                                const std::vector<double>& thresholds,
                                std::vector<std::string>* skipped = nullptr);

/// Sensitivity scan + degeneracy score for one twist; writes the scan CSV
/// when csv_path is non-empty and returns the score.
double run_analyze(const SensorConfig& config, double r, double phi,
                   const Twist& twist, double theta_min, double theta_max,
                   int n_samples, const std::string& csv_path);

}  // namespace fls

#endif  // FLS_PIPELINE_HPP
