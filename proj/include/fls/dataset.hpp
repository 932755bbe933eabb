// Basic-motion triplet datasets: frame sequences rendered along seeded
// motion chains, with per-pair twists and finite motions recorded in a JSON
// manifest.

#ifndef FLS_DATASET_HPP
#define FLS_DATASET_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fls/geometry.hpp"
#include "fls/simulator.hpp"

namespace fls {

enum class MotionTag { tx, ty, tz, wx, wy, wz };

std::string tag_name(MotionTag tag);
std::optional<MotionTag> tag_parse(const std::string& name);
bool tag_is_rotation(MotionTag tag);

/// Per-pair motion magnitude range; rotations in radians here (degrees only
/// at CLI and file boundaries).
struct MotionRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Magnitude ranges per tag: translations 8-12 cm, rotations 5-10 deg,
/// except the pitch motion at 2-4 deg to preserve frame overlap.
MotionRange default_motion_range(MotionTag tag);

struct TripletRecord {
  std::string target_id;
  std::array<std::string, 2> source_ids;
  std::array<Twist, 2> twist_to_source;     // target -> source, sensor frame
  std::array<RigidMotion, 2> motion_to_source;  // M_{t->s}
  std::string split;  // train | val | test
};

struct DatasetManifest {
  MotionTag tag = MotionTag::wx;
  uint64_t seed = 0;
  SensorConfig config;
  MotionRange range;
  std::vector<TripletRecord> triplets;

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);
  void save(const std::string& path) const;
  static DatasetManifest load(const std::string& path);
};

struct GenOptions {
  int n_triplets = 20;
  int n_terrains = 5;
  int triplets_per_sequence = 4;
  uint64_t seed = 1;
  SensorConfig config = dataset_sensor_config();
  TerrainParams terrain;
  RenderOptions render;
  std::optional<MotionRange> range_override;
  int jobs = 0;  // 0: hardware concurrency

  static SensorConfig dataset_sensor_config();
};

/// Render a triplet dataset under <out_dir> (frames/ + manifest.json).
/// Frame files: <id>.img with .img.json sidecar; targets additionally get
/// <id>_gt.elev and <id>_gt.ply. Throws on invalid configuration; n_triplets
/// of zero yields an empty manifest and no frame files.
DatasetManifest gen_dataset(const std::string& out_dir, MotionTag tag,
                            const GenOptions& opts);

}  // namespace fls

#endif  // FLS_DATASET_HPP
