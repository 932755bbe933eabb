#include "fls/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <thread>

#include <json.hpp>

#include "fls/mask.hpp"

namespace fs = std::filesystem;

namespace fls {

namespace {

double masked_mae_vs(const ElevationMap& est, const ElevationMap& gt) {
  double sum = 0.0;
  size_t n = 0;
  for (size_t k = 0; k < est.phi.data.size(); ++k) {
    if (!est.valid.data[k] || !gt.valid.data[k]) continue;
    sum += std::abs(est.phi.data[k] - gt.phi.data[k]);
    ++n;
  }
  return n ? sum / double(n) : -1.0;
}

TripletOutcome estimate_one(const TripletRecord& rec,
                            const std::string& frames_dir,
                            const std::string& out_dir,
                            const EstimateOptions& opts) {
  TripletOutcome outcome;
  outcome.target_id = rec.target_id;
  try {
    const PolarImage target = load_image(frames_dir + "/" + rec.target_id + ".img");
    const PolarImage src0 =
        load_image(frames_dir + "/" + rec.source_ids[0] + ".img");
    const PolarImage src1 =
        load_image(frames_dir + "/" + rec.source_ids[1] + ".img");
    const SignalMask mask =
        binarize(target, opts.mask_threshold, opts.mask_min_component);

    std::vector<SourceView> sources = {
        {&src0, rec.motion_to_source[0]},
        {&src1, rec.motion_to_source[1]},
    };
    const EstimationReport report = estimate(target, sources, mask, opts.opt);

    const std::string stem = out_dir + "/" + rec.target_id;
    save_elevation(stem + ".elev", report.elevation);
    save_ply(stem + "_cloud.ply",
             elevation_to_pointcloud(report.elevation, target.config));
    atomic_write(stem + "_loss.csv", report.trajectory_csv());

    outcome.ok = true;
    outcome.initial_loss = report.initial_loss;
    outcome.best_loss = report.best_loss;
    outcome.degenerate = report.degenerate;

    // Score against ground truth when the dataset carries it.
    const std::string gt_path = frames_dir + "/" + rec.target_id + "_gt.elev";
    if (fs::exists(gt_path)) {
      const ElevationMap gt = load_elevation(gt_path);
      outcome.mae_vs_gt = masked_mae_vs(report.elevation, gt);
      ElevationMap zero(gt.h(), gt.w());
      zero.valid = report.elevation.valid;
      outcome.mae_zero_baseline = masked_mae_vs(zero, gt);
    }

    nlohmann::ordered_json j;
    j["target"] = rec.target_id;
    j["sources"] = {rec.source_ids[0], rec.source_ids[1]};
    j["split"] = rec.split;
    j["iterations_used"] = report.iterations_used;
    j["best_iteration"] = report.best_iteration;
    j["initial_loss"] = report.initial_loss;
    j["best_loss"] = report.best_loss;
    j["loss_decrease"] =
        report.initial_loss > 0.0
            ? (report.initial_loss - report.best_loss) / report.initial_loss
            : 0.0;
    j["degenerate"] = report.degenerate;
    if (report.degenerate) j["note"] = "degenerate: loss decrease < 5%";
    j["in_bounds_fraction"] = report.in_bounds_fraction;
    if (outcome.mae_vs_gt >= 0.0) {
      j["mae_vs_gt_rad"] = outcome.mae_vs_gt;
      j["mae_zero_baseline_rad"] = outcome.mae_zero_baseline;
    }
    atomic_write(stem + "_report.json", j.dump(2) + "\n");
  } catch (const std::exception& ex) {
    outcome.ok = false;
    outcome.error = ex.what();
  }
  return outcome;
}

}  // namespace

std::vector<TripletOutcome> run_estimate(const std::string& dataset_dir,
                                         const std::string& out_dir,
                                         const EstimateOptions& opts) {
  const DatasetManifest manifest =
      DatasetManifest::load(dataset_dir + "/manifest.json");
  const std::string frames_dir = dataset_dir + "/frames";
  fs::create_directories(out_dir);

  std::vector<const TripletRecord*> selected;
  for (const TripletRecord& rec : manifest.triplets)
    if (opts.split == "all" || rec.split == opts.split)
      selected.push_back(&rec);

  std::vector<TripletOutcome> outcomes(selected.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t k = next.fetch_add(1);
      if (k >= selected.size()) return;
      outcomes[k] = estimate_one(*selected[k], frames_dir, out_dir, opts);
    }
  };
  const int jobs = opts.jobs > 0
                       ? opts.jobs
                       : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  nlohmann::ordered_json summary;
  summary["dataset"] = dataset_dir;
  summary["tag"] = tag_name(manifest.tag);
  summary["split"] = opts.split;
  summary["triplets"] = nlohmann::ordered_json::array();
  for (const TripletOutcome& o : outcomes) {
    nlohmann::ordered_json t;
    t["target"] = o.target_id;
    t["ok"] = o.ok;
    if (!o.ok) t["error"] = o.error;
    t["degenerate"] = o.degenerate;
    if (o.mae_vs_gt >= 0.0) {
      t["mae_vs_gt_rad"] = o.mae_vs_gt;
      t["mae_zero_baseline_rad"] = o.mae_zero_baseline;
    }
    summary["triplets"].push_back(t);
  }
  atomic_write(out_dir + "/summary.json", summary.dump(2) + "\n");
  return outcomes;
}

std::vector<FrameEval> run_eval(const std::string& pred_dir,
                                const std::string& gt_dir,
                                const std::vector<double>& thresholds,
                                std::vector<std::string>* skipped) {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".elev";
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());

  std::vector<FrameEval> evals;
  for (const std::string& id : ids) {
    const std::string gt_elev = gt_dir + "/" + id + "_gt.elev";
    const std::string gt_ply = gt_dir + "/" + id + "_gt.ply";
    if (!fs::exists(gt_elev) || !fs::exists(gt_ply)) {
      if (skipped) skipped->push_back(id);
      continue;
    }
    FrameEval fe;
    fe.id = id;
    const ElevationMap est = load_elevation(pred_dir + "/" + id + ".elev");
    const ElevationMap gt = load_elevation(gt_elev);
    const PointCloud est_cloud = load_ply(pred_dir + "/" + id + "_cloud.ply");
    const PointCloud gt_cloud = load_ply(gt_ply);
    fe.result = evaluate(est, gt, est_cloud, gt_cloud, thresholds);
    evals.push_back(fe);
  }
  if (evals.empty())
    throw std::runtime_error("run_eval: no frame id present in both dirs");

  std::string csv = "id,mae_rad,mae_scaled,cd";
  for (double t : thresholds) {
    char col[32];
    std::snprintf(col, sizeof(col), ",f_%gmm", t * 1000.0);
    csv += col;
  }
  csv += "\n";
  for (const FrameEval& fe : evals) {
    char row[256];
    std::snprintf(row, sizeof(row), "%s,%.9g,%.9g,%.9g", fe.id.c_str(),
                  fe.result.mae.mean, fe.result.mae.scaled, fe.result.cd);
    csv += row;
    for (double t : thresholds) {
      std::snprintf(row, sizeof(row), ",%.9g", fe.result.f_scores.at(t));
      csv += row;
    }
    csv += "\n";
  }
  atomic_write(pred_dir + "/metrics.csv", csv);

  nlohmann::ordered_json j;
  double mae_sum = 0.0, cd_sum = 0.0;
  for (const FrameEval& fe : evals) {
    mae_sum += fe.result.mae.mean;
    cd_sum += fe.result.cd;
  }
  j["frames"] = evals.size();
  j["mean_mae_rad"] = mae_sum / double(evals.size());
  j["mean_cd"] = cd_sum / double(evals.size());
  for (double t : thresholds) {
    double f_sum = 0.0;
    for (const FrameEval& fe : evals) f_sum += fe.result.f_scores.at(t);
    char key[32];
    std::snprintf(key, sizeof(key), "mean_f_%gmm", t * 1000.0);
    j[key] = f_sum / double(evals.size());
  }
  if (skipped && !skipped->empty()) j["skipped"] = *skipped;
  atomic_write(pred_dir + "/metrics.json", j.dump(2) + "\n");
  return evals;
}

double run_analyze(const SensorConfig& config, double r, double phi,
                   const Twist& twist, double theta_min, double theta_max,
                   int n_samples, const std::string& csv_path) {
  if (!csv_path.empty()) {
    const SensitivityScan scan =
        sensitivity_scan(config, r, phi, twist, theta_min, theta_max, n_samples);
    atomic_write(csv_path, scan.to_csv());
  }
  const bool zero = twist.t.isZero(0.0) && twist.omega.isZero(0.0);
  return zero ? 0.0 : degeneracy_score(twist, config);
}

}  // namespace fls
