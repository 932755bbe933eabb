#include "fls/terrain.hpp"

#include <cmath>

namespace fls {

uint64_t split_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

// Lattice hash -> [0,1).
double lattice(uint64_t seed, int64_t ix, int64_t iy, int octave) {
  uint64_t h = seed;
  h = split_seed(h, uint64_t(ix) * 0x632be59bd9b4e019ULL);
  h = split_seed(h, uint64_t(iy) * 0x9e3779b97f4a7c15ULL);
  h = split_seed(h, uint64_t(octave));
  return double(h >> 11) * (1.0 / 9007199254740992.0);
}

double quintic(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(uint64_t seed, double x, double y, int octave) {
  const double fx = std::floor(x), fy = std::floor(y);
  const int64_t ix = int64_t(fx), iy = int64_t(fy);
  const double ux = quintic(x - fx), uy = quintic(y - fy);
  const double a = lattice(seed, ix, iy, octave);
  const double b = lattice(seed, ix + 1, iy, octave);
  const double c = lattice(seed, ix, iy + 1, octave);
  const double d = lattice(seed, ix + 1, iy + 1, octave);
  const double v = a + (b - a) * ux + (c - a) * uy + (a - b - c + d) * ux * uy;
  return 2.0 * v - 1.0;  // [-1, 1]
}

double fbm(uint64_t seed, double x, double y, const TerrainParams& p) {
  double out = 0.0;
  double amp = p.amplitude;
  double wavelength = p.base_wavelength;
  for (int o = 0; o < p.octaves; ++o) {
    out += amp * value_noise(seed, x / wavelength, y / wavelength, o);
    amp *= p.gain;
    wavelength /= p.lacunarity;
  }
  return out;
}

}  // namespace

Terrain::Terrain(uint64_t seed, const TerrainParams& params)
    : seed_(seed), params_(params) {
  const int n = params.grid;
  heights_ = GridD(n, n, 0.0);
  cell_ = params.extent / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double y = -params.extent / 2.0 + i * cell_;
    for (int j = 0; j < n; ++j) {
      const double x = -params.extent / 2.0 + j * cell_;
      heights_.at(i, j) = fbm(seed, x, y, params);
    }
  }
}

double Terrain::height(double x, double y) const {
  const double half = params_.extent / 2.0;
  if (x < -half || x > half || y < -half || y > half) return -1e9;
  const double gx = (x + half) / cell_;
  const double gy = (y + half) / cell_;
  const int j = std::min(int(gx), heights_.w - 2);
  const int i = std::min(int(gy), heights_.h - 2);
  const double ax = gx - j, ay = gy - i;
  const double h00 = heights_.at(i, j), h01 = heights_.at(i, j + 1);
  const double h10 = heights_.at(i + 1, j), h11 = heights_.at(i + 1, j + 1);
  return h00 + (h01 - h00) * ax + (h10 - h00) * ay +
         (h00 - h01 - h10 + h11) * ax * ay;
}

Vec3 Terrain::normal(double x, double y) const {
  const double d = cell_;
  const double dzdx = (height(x + d, y) - height(x - d, y)) / (2.0 * d);
  const double dzdy = (height(x, y + d) - height(x, y - d)) / (2.0 * d);
  return Vec3(-dzdx, -dzdy, 1.0).normalized();
}

double Terrain::albedo(double x, double y) const {
  const uint64_t seed = split_seed(seed_, 0xa1b2c3d4ULL);
  double value = 0.0;
  double amp = 1.0, norm = 0.0;
  double wavelength = params_.albedo_wavelength;
  for (int o = 0; o < params_.albedo_octaves; ++o) {
    value += amp * value_noise(seed, x / wavelength, y / wavelength, 100 + o);
    norm += amp;
    amp *= params_.albedo_gain;
    wavelength /= params_.albedo_lacunarity;
  }
  const double unit = 0.5 * (value / norm + 1.0);  // [0,1]
  return params_.albedo_min + (1.0 - params_.albedo_min) * unit;
}

Terrain gen_terrain(uint64_t seed, const TerrainParams& params) {
  if (!(params.extent > 0.0))
    throw std::invalid_argument("gen_terrain: extent must be > 0");
  return Terrain(seed, params);
}

}  // namespace fls
