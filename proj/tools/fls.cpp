// Command line for the FLS geometry lab: dataset generation, motion
// analysis, per-triplet elevation estimation and evaluation.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fls/dataset.hpp"
#include "fls/pipeline.hpp"

using namespace fls;

namespace {

SensorConfig config_from_flag(const std::string& path) {
  if (path.empty()) return GenOptions::dataset_sensor_config();
  return SensorConfig::load(path);
}

int cmd_gen(const std::string& motion, int n, const std::string& out,
            uint64_t seed, uint64_t terrain_seed, int terrains, int jobs,
            const std::string& config_path) {
  const auto tag = tag_parse(motion);
  if (!tag) {
    std::fprintf(stderr, "unknown motion tag '%s' (use tx ty tz wx wy wz)\n",
                 motion.c_str());
    return 1;
  }
  GenOptions opts;
  opts.n_triplets = n;
  opts.n_terrains = terrains;
  opts.seed = seed ^ split_seed(terrain_seed, 0);
  opts.jobs = jobs;
  opts.config = config_from_flag(config_path);
  const DatasetManifest manifest = gen_dataset(out, *tag, opts);
  size_t train = 0, val = 0, test = 0;
  for (const auto& t : manifest.triplets) {
    train += t.split == "train";
    val += t.split == "val";
    test += t.split == "test";
  }
  std::printf("dataset %s: %zu triplets (train %zu, val %zu, test %zu) -> %s\n",
              tag_name(*tag).c_str(), manifest.triplets.size(), train, val,
              test, out.c_str());
  return 0;
}

int cmd_analyze(const std::string& config_path, double r, double phi_deg,
                const std::vector<double>& twist_flags,
                const std::string& scan_spec, const std::string& out_csv) {
  const SensorConfig config = config_path.empty()
                                  ? SensorConfig{}
                                  : SensorConfig::load(config_path);
  Twist xi;
  xi.t = Vec3(twist_flags[0], twist_flags[1], twist_flags[2]);
  xi.omega = Vec3(deg2rad(twist_flags[3]), deg2rad(twist_flags[4]),
                  deg2rad(twist_flags[5]));

  double a = rad2deg(-config.theta_half());
  double b = rad2deg(config.theta_half());
  int n = 301;
  if (!scan_spec.empty() &&
      std::sscanf(scan_spec.c_str(), "%lf:%lf:%d", &a, &b, &n) != 3) {
    std::fprintf(stderr, "bad --scan-theta '%s', expected a:b:n\n",
                 scan_spec.c_str());
    return 1;
  }
  const double score = run_analyze(config, r, deg2rad(phi_deg), xi,
                                   deg2rad(a), deg2rad(b), n, out_csv);
  std::printf("degeneracy_score %.6g (%s)\n", score,
              score < 1.0 ? "degenerate" : "effective");
  if (!out_csv.empty()) std::printf("scan -> %s\n", out_csv.c_str());
  return 0;
}

int cmd_estimate(const std::string& manifest_dir, const std::string& split,
                 int iters, const std::string& out, int jobs) {
  EstimateOptions opts;
  opts.split = split;
  opts.opt.iterations = iters;
  opts.jobs = jobs;
  const std::vector<TripletOutcome> outcomes =
      run_estimate(manifest_dir, out, opts);
  size_t ok = 0, degenerate = 0;
  for (const TripletOutcome& o : outcomes) {
    ok += o.ok;
    degenerate += o.ok && o.degenerate;
    if (!o.ok)
      std::fprintf(stderr, "FAILED %s: %s\n", o.target_id.c_str(),
                   o.error.c_str());
  }
  std::printf("estimated %zu/%zu triplets (%zu flagged degenerate) -> %s\n", ok,
              outcomes.size(), degenerate, out.c_str());
  if (!outcomes.empty() && ok == 0) return 2;
  return 0;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir,
             const std::string& thresholds_flag) {
  std::vector<double> thresholds;
  std::string spec = thresholds_flag;
  for (size_t pos = 0; pos != std::string::npos;) {
    const size_t comma = spec.find(',', pos);
    thresholds.push_back(std::stod(spec.substr(pos, comma - pos)));
    pos = comma == std::string::npos ? comma : comma + 1;
  }
  std::vector<std::string> skipped;
  const std::vector<FrameEval> evals =
      run_eval(pred_dir, gt_dir, thresholds, &skipped);
  for (const std::string& id : skipped)
    std::fprintf(stderr, "skipped %s: no matching ground truth\n", id.c_str());
  double mae_sum = 0.0;
  for (const FrameEval& fe : evals) mae_sum += fe.result.mae.mean;
  std::printf("evaluated %zu frames, mean MAE %.6g rad -> %s/metrics.csv\n",
              evals.size(), mae_sum / double(evals.size()), pred_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward-looking sonar elevation-from-motion lab"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Render a basic-motion triplet dataset");
  std::string motion = "wx", gen_out = "dataset", gen_config;
  int gen_n = 20, terrains = 5, gen_jobs = 0;
  uint64_t seed = 1, terrain_seed = 0;
  gen->add_option("--motion", motion, "tx|ty|tz|wx|wy|wz")->required();
  gen->add_option("--n", gen_n, "number of triplets")->required();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", seed, "master seed");
  gen->add_option("--terrain-seed", terrain_seed, "extra terrain seed");
  gen->add_option("--terrains", terrains, "number of terrains");
  gen->add_option("--jobs", gen_jobs, "parallel sequences (0: all cores)");
  gen->add_option("--config", gen_config, "sensor config JSON");

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "Sensitivity scan and degeneracy score for a twist");
  std::string ana_config, scan_spec, ana_out;
  double ana_r = 3.5, ana_phi = 3.5;
  std::vector<double> twist_flags(6, 0.0);
  analyze->add_option("--config", ana_config, "sensor config JSON");
  analyze->add_option("--r", ana_r, "range of the scan [m]");
  analyze->add_option("--phi", ana_phi, "elevation of the scan [deg]");
  analyze->add_option("--tx", twist_flags[0], "x translation [m]");
  analyze->add_option("--ty", twist_flags[1], "y translation [m]");
  analyze->add_option("--tz", twist_flags[2], "z translation [m]");
  analyze->add_option("--wx", twist_flags[3], "x rotation [deg]");
  analyze->add_option("--wy", twist_flags[4], "y rotation [deg]");
  analyze->add_option("--wz", twist_flags[5], "z rotation [deg]");
  analyze->add_option("--scan-theta", scan_spec, "a:b:n azimuth sweep [deg]");
  analyze->add_option("--out", ana_out, "scan CSV path");

  // estimate
  auto* est = app.add_subcommand(
      "estimate", "Optimize elevation maps for every triplet of a split");
  std::string manifest_dir, split = "test", est_out = "estimates";
  int iters = 500, est_jobs = 0;
  est->add_option("--manifest", manifest_dir, "dataset directory")->required();
  est->add_option("--split", split, "train|val|test|all");
  est->add_option("--iters", iters, "iteration budget");
  est->add_option("--out", est_out, "output directory")->required();
  est->add_option("--jobs", est_jobs, "parallel triplets (0: all cores)");

  // eval
  auto* eval = app.add_subcommand("eval", "Score estimates against ground truth");
  std::string pred_dir, gt_dir, thresholds = "0.001,0.003";
  eval->add_option("--pred-dir", pred_dir, "estimates directory")->required();
  eval->add_option("--gt-dir", gt_dir, "ground-truth frames directory")
      ->required();
  eval->add_option("--thresholds", thresholds, "f-score thresholds [m]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_gen(motion, gen_n, gen_out, seed, terrain_seed, terrains,
                     gen_jobs, gen_config);
    if (analyze->parsed())
      return cmd_analyze(ana_config, ana_r, ana_phi, twist_flags, scan_spec,
                         ana_out);
    if (est->parsed())
      return cmd_estimate(manifest_dir, split, iters, est_out, est_jobs);
    if (eval->parsed()) return cmd_eval(pred_dir, gt_dir, thresholds);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
  return 1;
}
