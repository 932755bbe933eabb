#include "fls/image.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fls {

size_t ElevationMap::valid_count() const {
  size_t n = 0;
  for (uint8_t v : valid.data) n += (v != 0);
  return n;
}

size_t SignalMask::count() const {
  size_t n = 0;
  for (uint8_t v : valid.data) n += (v != 0);
  return n;
}

namespace {

constexpr char kMagicImage[12] = {'F', 'L', 'S', '.', 'I', 'M', 'G', 0, 0, 0, 0, 0};
constexpr char kMagicElev[12] = {'F', 'L', 'S', '.', 'E', 'L', 'E', 'V', 0, 0, 0, 0};
constexpr char kMagicMask[12] = {'F', 'L', 'S', '.', 'M', 'A', 'S', 'K', 0, 0, 0, 0};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
               char((v >> 24) & 0xff)};
  out.append(b, 4);
}

uint32_t get_u32(const char* p) {
  return uint32_t(uint8_t(p[0])) | uint32_t(uint8_t(p[1])) << 8 |
         uint32_t(uint8_t(p[2])) << 16 | uint32_t(uint8_t(p[3])) << 24;
}

void put_f32_plane(std::string& out, const std::vector<float>& plane) {
  static_assert(sizeof(float) == 4);
  // Little-endian hosts write planes directly.
  out.append(reinterpret_cast<const char*>(plane.data()), plane.size() * 4);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string encode_raster(const char magic[12], int h, int w,
                          const std::vector<const GridD*>& d_planes,
                          const std::vector<const GridB*>& b_planes) {
  std::string out;
  out.append(magic, 12);
  put_u32(out, kVersion);
  put_u32(out, uint32_t(h));
  put_u32(out, uint32_t(w));
  std::vector<float> plane(size_t(h) * w);
  for (const GridD* g : d_planes) {
    for (size_t k = 0; k < g->data.size(); ++k) plane[k] = float(g->data[k]);
    put_f32_plane(out, plane);
  }
  for (const GridB* g : b_planes) {
    for (size_t k = 0; k < g->data.size(); ++k)
      plane[k] = g->data[k] ? 1.0f : 0.0f;
    put_f32_plane(out, plane);
  }
  return out;
}

void decode_header(const std::string& buf, const char magic[12], int& h, int& w,
                   size_t n_planes, const std::string& path) {
  if (buf.size() < 24 || std::memcmp(buf.data(), magic, 12) != 0)
    throw std::runtime_error("bad raster magic in " + path);
  if (get_u32(buf.data() + 12) != kVersion)
    throw std::runtime_error("unsupported raster version in " + path);
  h = int(get_u32(buf.data() + 16));
  w = int(get_u32(buf.data() + 20));
  if (buf.size() != 24 + n_planes * size_t(h) * w * 4)
    throw std::runtime_error("truncated raster file " + path);
}

void decode_plane(const std::string& buf, size_t index, GridD& g) {
  const char* p = buf.data() + 24 + index * g.data.size() * 4;
  for (size_t k = 0; k < g.data.size(); ++k) {
    float f;
    std::memcpy(&f, p + k * 4, 4);
    g.data[k] = double(f);
  }
}

void decode_plane(const std::string& buf, size_t index, GridB& g) {
  const char* p = buf.data() + 24 + index * g.data.size() * 4;
  for (size_t k = 0; k < g.data.size(); ++k) {
    float f;
    std::memcpy(&f, p + k * 4, 4);
    g.data[k] = f != 0.0f ? 1 : 0;
  }
}

}  // namespace

void atomic_write(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f.write(contents.data(), std::streamsize(contents.size()));
    if (!f) throw std::runtime_error("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " -> " + path);
}

void save_image(const std::string& path, const PolarImage& img) {
  atomic_write(path, encode_raster(kMagicImage, img.h(), img.w(),
                                   {&img.intensity}, {}));
}

PolarImage load_image(const std::string& path) {
  const std::string buf = read_file(path);
  int h, w;
  decode_header(buf, kMagicImage, h, w, 1, path);
  PolarImage img;
  img.intensity = GridD(h, w);
  decode_plane(buf, 0, img.intensity);
  // The sidecar, when present, restores config and pose.
  load_sidecar(path + ".json", img.config, img.pose);
  return img;
}

void save_elevation(const std::string& path, const ElevationMap& map) {
  atomic_write(path, encode_raster(kMagicElev, map.h(), map.w(), {&map.phi},
                                   {&map.valid}));
}

ElevationMap load_elevation(const std::string& path) {
  const std::string buf = read_file(path);
  int h, w;
  decode_header(buf, kMagicElev, h, w, 2, path);
  ElevationMap map(h, w);
  decode_plane(buf, 0, map.phi);
  decode_plane(buf, 1, map.valid);
  return map;
}

void save_mask(const std::string& path, const SignalMask& mask) {
  atomic_write(path,
               encode_raster(kMagicMask, mask.h(), mask.w(), {}, {&mask.valid}));
}

SignalMask load_mask(const std::string& path) {
  const std::string buf = read_file(path);
  int h, w;
  decode_header(buf, kMagicMask, h, w, 1, path);
  SignalMask mask(h, w);
  decode_plane(buf, 0, mask.valid);
  return mask;
}

void save_sidecar(const std::string& path, const SensorConfig& config,
                  const RigidMotion& pose) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(config.to_json());
  std::vector<double> rot(9), trans(3);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot[r * 3 + c] = pose.rotation(r, c);
  for (int r = 0; r < 3; ++r) trans[r] = pose.translation(r);
  j["pose"]["rotation"] = rot;
  j["pose"]["translation"] = trans;
  atomic_write(path, j.dump(2) + "\n");
}

void load_sidecar(const std::string& path, SensorConfig& config,
                  RigidMotion& pose) {
  std::ifstream f(path);
  if (!f) return;  // sidecar is optional on load
  nlohmann::json j;
  f >> j;
  config = SensorConfig::from_json(j.at("config").dump());
  const auto rot = j.at("pose").at("rotation").get<std::vector<double>>();
  const auto trans = j.at("pose").at("translation").get<std::vector<double>>();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) pose.rotation(r, c) = rot[r * 3 + c];
  for (int r = 0; r < 3; ++r) pose.translation(r) = trans[r];
}

void save_ply(const std::string& path, const PointCloud& cloud) {
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\nend_header\n";
  char line[96];
  for (const Vec3& p : cloud.points) {
    std::snprintf(line, sizeof(line), "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    out += line;
  }
  atomic_write(path, out);
}

PointCloud load_ply(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string line;
  size_t n = 0;
  bool header_done = false;
  while (std::getline(f, line)) {
    if (line.rfind("element vertex", 0) == 0)
      n = std::stoul(line.substr(std::string("element vertex").size()));
    if (line == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw std::runtime_error("bad PLY header in " + path);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    double x, y, z;
    if (!(f >> x >> y >> z)) throw std::runtime_error("truncated PLY " + path);
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

}  // namespace fls
