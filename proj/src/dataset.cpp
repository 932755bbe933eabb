#include "fls/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace fs = std::filesystem;

namespace fls {

std::string tag_name(MotionTag tag) {
  switch (tag) {
    case MotionTag::tx: return "tx";
    case MotionTag::ty: return "ty";
    case MotionTag::tz: return "tz";
    case MotionTag::wx: return "wx";
    case MotionTag::wy: return "wy";
    case MotionTag::wz: return "wz";
  }
  return "??";
}

std::optional<MotionTag> tag_parse(const std::string& name) {
  for (MotionTag t : {MotionTag::tx, MotionTag::ty, MotionTag::tz,
                      MotionTag::wx, MotionTag::wy, MotionTag::wz})
    if (tag_name(t) == name) return t;
  return std::nullopt;
}

bool tag_is_rotation(MotionTag tag) {
  return tag == MotionTag::wx || tag == MotionTag::wy || tag == MotionTag::wz;
}

MotionRange default_motion_range(MotionTag tag) {
  switch (tag) {
    case MotionTag::tx:
    case MotionTag::ty:
    case MotionTag::tz: return {0.08, 0.12};
    case MotionTag::wx:
    case MotionTag::wz: return {deg2rad(5.0), deg2rad(10.0)};
    case MotionTag::wy: return {deg2rad(2.0), deg2rad(4.0)};
  }
  return {};
}

SensorConfig GenOptions::dataset_sensor_config() {
  SensorConfig c;
  c.r_min = 2.6;
  c.r_max = 5.0;
  c.n_range = 256;
  c.n_azimuth = 128;
  c.azimuth_fov = deg2rad(30.0);
  c.elevation_aperture = deg2rad(14.0);
  return c;
}

namespace {

Twist tag_twist(MotionTag tag, double value) {
  Twist xi;
  switch (tag) {
    case MotionTag::tx: xi.t.x() = value; break;
    case MotionTag::ty: xi.t.y() = value; break;
    case MotionTag::tz: xi.t.z() = value; break;
    case MotionTag::wx: xi.omega.x() = value; break;
    case MotionTag::wy: xi.omega.y() = value; break;
    case MotionTag::wz: xi.omega.z() = value; break;
  }
  return xi;
}

double cumulative_cap(MotionTag tag) {
  switch (tag) {
    case MotionTag::tx:
    case MotionTag::ty:
    case MotionTag::tz: return 0.20;
    case MotionTag::wy: return deg2rad(4.5);
    default: return deg2rad(15.0);
  }
}

Mat3 rot_z(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

Mat3 rot_y(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

RigidMotion sample_base_pose(const Terrain& terrain, const SensorConfig& config,
                             std::mt19937_64& rng) {
  // Coarse probe used only for placement acceptance.
  SensorConfig probe_cfg = config;
  probe_cfg.n_range = 64;
  probe_cfg.n_azimuth = 32;
  RenderOptions probe_opts;
  probe_opts.n_phi = 48;
  probe_opts.march_step = 0.02;

  // Survey geometry: the fan grazes the seabed across most of the range
  // window, and vertical motion stays small relative to altitude.
  std::uniform_real_distribution<double> uxy(-0.5, 0.5);
  std::uniform_real_distribution<double> uyaw(-kPi, kPi);
  std::uniform_real_distribution<double> ualt(1.35, 1.60);
  std::uniform_real_distribution<double> upitch(deg2rad(20.0), deg2rad(24.0));

  RigidMotion best;
  double best_err = 1e9;
  for (int attempt = 0; attempt < 30; ++attempt) {
    RigidMotion pose;
    const double x = uxy(rng), y = uxy(rng);
    pose.translation = Vec3(x, y, terrain.height(x, y) + ualt(rng));
    pose.rotation = rot_z(uyaw(rng)) * rot_y(upitch(rng));
    const double frac = coverage_fraction(terrain, pose, probe_cfg, probe_opts);
    if (frac >= 0.55 && frac <= 0.92) return pose;
    const double err = std::abs(frac - 0.75);
    if (err < best_err) {
      best_err = err;
      best = pose;
    }
  }
  return best;
}

struct SequencePlan {
  size_t terrain_index = 0;
  size_t sequence_index = 0;  // global, for ids and seeding
  int n_triplets = 0;
  std::string split;
};

struct SequenceResult {
  std::vector<TripletRecord> triplets;
  std::vector<std::pair<std::string, size_t>> multi_hit;
};

SequenceResult run_sequence(const SequencePlan& plan, MotionTag tag,
                            const MotionRange& range, const GenOptions& opts,
                            const std::string& frames_dir) {
  std::mt19937_64 rng(split_seed(opts.seed, 1000 + plan.sequence_index));
  const Terrain terrain = gen_terrain(
      split_seed(opts.seed, plan.terrain_index), opts.terrain);
  const RigidMotion base = sample_base_pose(terrain, opts.config, rng);

  const int n_frames = plan.n_triplets + 2;
  std::uniform_real_distribution<double> umag(range.lo, range.hi);
  std::uniform_int_distribution<int> usign(0, 1);

  // Signed per-step motions; flip the drawn sign when the running total
  // would leave the well-covered pose region.
  std::vector<Twist> steps(static_cast<size_t>(n_frames) - 1);
  double cumulative = 0.0;
  const double cap = cumulative_cap(tag);
  for (auto& step : steps) {
    const double mag = umag(rng);
    double sign = usign(rng) ? 1.0 : -1.0;
    if (std::abs(cumulative + sign * mag) > cap) sign = -sign;
    cumulative += sign * mag;
    step = tag_twist(tag, sign * mag);
  }

  std::vector<RigidMotion> poses(static_cast<size_t>(n_frames));
  poses[0] = base;
  for (int k = 1; k < n_frames; ++k)
    poses[size_t(k)] = poses[size_t(k) - 1].compose(exp_twist(-steps[size_t(k) - 1]));

  SequenceResult result;
  std::vector<std::string> ids(static_cast<size_t>(n_frames));
  for (int k = 0; k < n_frames; ++k) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s_t%02zu_q%03zu_f%02d",
                  tag_name(tag).c_str(), plan.terrain_index,
                  plan.sequence_index, k);
    ids[size_t(k)] = id;
    const RenderResult frame =
        render(terrain, poses[size_t(k)], opts.config, opts.render);
    const std::string stem = frames_dir + "/" + ids[size_t(k)];
    save_image(stem + ".img", frame.image);
    save_sidecar(stem + ".img.json", opts.config, poses[size_t(k)]);
    const bool is_target = k >= 1 && k + 1 < n_frames;
    if (is_target) {
      save_elevation(stem + "_gt.elev", frame.elevation);
      save_ply(stem + "_gt.ply", frame.cloud);
      result.multi_hit.emplace_back(ids[size_t(k)], frame.multi_hit_pixels);
    }
  }

  for (int k = 1; k + 1 < n_frames; ++k) {
    TripletRecord rec;
    rec.target_id = ids[size_t(k)];
    rec.source_ids = {ids[size_t(k) - 1], ids[size_t(k) + 1]};
    rec.twist_to_source = {-steps[size_t(k) - 1], steps[size_t(k)]};
    rec.motion_to_source = {exp_twist(rec.twist_to_source[0]),
                            exp_twist(rec.twist_to_source[1])};
    rec.split = plan.split;
    result.triplets.push_back(rec);
  }
  return result;
}

nlohmann::ordered_json twist_json(const Twist& xi) {
  return {{"t", {xi.t.x(), xi.t.y(), xi.t.z()}},
          {"omega", {xi.omega.x(), xi.omega.y(), xi.omega.z()}}};
}

Twist twist_from_json(const nlohmann::json& j) {
  Twist xi;
  for (int k = 0; k < 3; ++k) {
    xi.t(k) = j.at("t").at(size_t(k)).get<double>();
    xi.omega(k) = j.at("omega").at(size_t(k)).get<double>();
  }
  return xi;
}

nlohmann::ordered_json motion_json(const RigidMotion& m) {
  std::vector<double> rot(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot[size_t(r * 3 + c)] = m.rotation(r, c);
  return {{"rotation", rot},
          {"translation", {m.translation.x(), m.translation.y(),
                           m.translation.z()}}};
}

RigidMotion motion_from_json(const nlohmann::json& j) {
  RigidMotion m;
  const auto rot = j.at("rotation").get<std::vector<double>>();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m.rotation(r, c) = rot[size_t(r * 3 + c)];
  for (int k = 0; k < 3; ++k)
    m.translation(k) = j.at("translation").at(size_t(k)).get<double>();
  m.validate();
  return m;
}

}  // namespace

std::string DatasetManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tag"] = tag_name(tag);
  j["seed"] = seed;
  j["config"] = nlohmann::ordered_json::parse(config.to_json());
  j["motion_lo"] = range.lo;
  j["motion_hi"] = range.hi;
  j["triplets"] = nlohmann::ordered_json::array();
  for (const TripletRecord& rec : triplets) {
    nlohmann::ordered_json t;
    t["target"] = rec.target_id;
    t["sources"] = {rec.source_ids[0], rec.source_ids[1]};
    t["twists"] = {twist_json(rec.twist_to_source[0]),
                   twist_json(rec.twist_to_source[1])};
    t["motions"] = {motion_json(rec.motion_to_source[0]),
                    motion_json(rec.motion_to_source[1])};
    t["split"] = rec.split;
    j["triplets"].push_back(t);
  }
  return j.dump(2);
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  DatasetManifest m;
  const auto tag = tag_parse(j.at("tag").get<std::string>());
  if (!tag) throw std::runtime_error("manifest: unknown motion tag");
  m.tag = *tag;
  m.seed = j.at("seed").get<uint64_t>();
  m.config = SensorConfig::from_json(j.at("config").dump());
  m.range.lo = j.at("motion_lo").get<double>();
  m.range.hi = j.at("motion_hi").get<double>();
  for (const auto& t : j.at("triplets")) {
    TripletRecord rec;
    rec.target_id = t.at("target").get<std::string>();
    rec.source_ids = {t.at("sources").at(0).get<std::string>(),
                      t.at("sources").at(1).get<std::string>()};
    rec.twist_to_source = {twist_from_json(t.at("twists").at(0)),
                           twist_from_json(t.at("twists").at(1))};
    rec.motion_to_source = {motion_from_json(t.at("motions").at(0)),
                            motion_from_json(t.at("motions").at(1))};
    rec.split = t.at("split").get<std::string>();
    m.triplets.push_back(rec);
  }
  return m;
}

void DatasetManifest::save(const std::string& path) const {
  atomic_write(path, to_json() + "\n");
}

DatasetManifest DatasetManifest::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

DatasetManifest gen_dataset(const std::string& out_dir, MotionTag tag,
                            const GenOptions& opts) {
  if (opts.n_triplets < 0)
    throw std::invalid_argument("gen_dataset: n_triplets must be >= 0");
  if (opts.n_terrains < 1 || opts.triplets_per_sequence < 1)
    throw std::invalid_argument("gen_dataset: bad terrain/sequence counts");
  const MotionRange range =
      opts.range_override ? *opts.range_override : default_motion_range(tag);
  if (!(range.lo > 0.0) || !(range.hi >= range.lo))
    throw std::invalid_argument("gen_dataset: empty motion range");
  opts.config.validate();

  DatasetManifest manifest;
  manifest.tag = tag;
  manifest.seed = opts.seed;
  manifest.config = opts.config;
  manifest.range = range;

  fs::create_directories(out_dir);
  if (opts.n_triplets == 0) {
    manifest.save(out_dir + "/manifest.json");
    return manifest;
  }
  const std::string frames_dir = out_dir + "/frames";
  fs::create_directories(frames_dir);

  // Round-robin triplets over terrains, then chop into sequences. Splits are
  // assigned per terrain so no terrain is shared across splits.
  std::vector<int> per_terrain(size_t(opts.n_terrains), 0);
  for (int k = 0; k < opts.n_triplets; ++k)
    per_terrain[size_t(k) % per_terrain.size()]++;
  const int train_end = std::max(1, int(std::ceil(opts.n_terrains * 0.4)));
  const int val_end = std::max(train_end + 1, int(std::ceil(opts.n_terrains * 0.6)));

  std::vector<SequencePlan> plans;
  size_t seq_counter = 0;
  for (int t = 0; t < opts.n_terrains; ++t) {
    int remaining = per_terrain[size_t(t)];
    while (remaining > 0) {
      SequencePlan plan;
      plan.terrain_index = size_t(t);
      plan.sequence_index = seq_counter++;
      plan.n_triplets = std::min(remaining, opts.triplets_per_sequence);
      plan.split = t < train_end ? "train" : (t < val_end ? "val" : "test");
      remaining -= plan.n_triplets;
      plans.push_back(plan);
    }
  }

  const int jobs = opts.jobs > 0
                       ? opts.jobs
                       : std::max(1u, std::thread::hardware_concurrency());
  std::vector<SequenceResult> results(plans.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t k = next.fetch_add(1);
      if (k >= plans.size()) return;
      results[k] = run_sequence(plans[k], tag, range, opts, frames_dir);
    }
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (const SequenceResult& r : results)
    manifest.triplets.insert(manifest.triplets.end(), r.triplets.begin(),
                             r.triplets.end());
  manifest.save(out_dir + "/manifest.json");

  // Per-image diagnostics for the non-bijective correspondence count.
  nlohmann::ordered_json stats;
  for (const SequenceResult& r : results)
    for (const auto& [id, count] : r.multi_hit) stats[id] = count;
  atomic_write(out_dir + "/render_stats.json", stats.dump(2) + "\n");
  return manifest;
}

}  // namespace fls
