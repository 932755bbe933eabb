#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fls/loss.hpp"
#include "fls/simulator.hpp"

using namespace fls;

namespace {

GridB full_mask(int h, int w) { return GridB(h, w, 1); }

GridD random_image(int h, int w, uint64_t seed) {
  GridD img(h, w);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : img.data) v = u(rng);
  return img;
}

// Naive window-statistics oracle, independent of the SAT implementation.
double ssim_naive_at(const GridD& a, const GridD& b, int i, int j, int radius,
                     double c1, double c2) {
  const int i0 = std::max(0, i - radius), i1 = std::min(a.h - 1, i + radius);
  const int j0 = std::max(0, j - radius), j1 = std::min(a.w - 1, j + radius);
  const int n = (i1 - i0 + 1) * (j1 - j0 + 1);
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int y = i0; y <= i1; ++y)
    for (int x = j0; x <= j1; ++x) {
      sa += a.at(y, x);
      sb += b.at(y, x);
      saa += a.at(y, x) * a.at(y, x);
      sbb += b.at(y, x) * b.at(y, x);
      sab += a.at(y, x) * b.at(y, x);
    }
  const double mu_a = sa / n, mu_b = sb / n;
  const double var_a = saa / n - mu_a * mu_a;
  const double var_b = sbb / n - mu_b * mu_b;
  const double cov = sab / n - mu_a * mu_b;
  return (2 * mu_a * mu_b + c1) * (2 * cov + c2) /
         ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
}

}  // namespace

TEST_CASE("ssim of an image with itself is exactly one") {
  const GridD img = random_image(20, 15, 1);
  const SsimResult res = ssim(img, img, full_mask(20, 15));
  CHECK(res.mean == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : res.map.data) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("checkerboard against its inverse: window oracle agreement") {
  GridD img(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) img.at(i, j) = double((i + j) % 2);
  GridD inv(16, 16);
  for (size_t k = 0; k < img.data.size(); ++k) inv.data[k] = 1.0 - img.data[k];

  const LossOptions opts;
  const SsimResult res = ssim(img, inv, full_mask(16, 16), opts);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      const double oracle = ssim_naive_at(img, inv, i, j, opts.ssim_window / 2,
                                          opts.ssim_c1, opts.ssim_c2);
      CHECK(res.map.at(i, j) == doctest::Approx(oracle).epsilon(1e-12));
      if (i >= 3 && i < 13 && j >= 3 && j < 13)
        CHECK(res.map.at(i, j) < -0.99);  // anti-correlated interior windows
    }
}

TEST_CASE("constant images: closed-form SSIM and reconstruction loss") {
  const double a = 0.4, offset = 0.1;
  GridD ia(10, 10, a), ib(10, 10, a + offset);
  const LossOptions opts;
  const SsimResult res = ssim(ia, ib, full_mask(10, 10), opts);
  // Variances vanish; S = (2 a b + C1) C2 / ((a^2 + b^2 + C1) C2).
  const double b = a + offset;
  const double closed = (2 * a * b + opts.ssim_c1) / (a * a + b * b + opts.ssim_c1);
  CHECK(res.mean == doctest::Approx(closed).epsilon(1e-12));

  const double loss = recon_loss(ia, ib, full_mask(10, 10), opts);
  const double expected = opts.beta * (1.0 - closed) + (1.0 - opts.beta) * offset;
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));
  // The L1 share alone is (1 - beta) * 0.1 = 0.07.
  CHECK((1.0 - opts.beta) * offset == doctest::Approx(0.07).epsilon(1e-12));
}

TEST_CASE("ssim symmetry and range on random pairs") {
  const GridD a = random_image(24, 18, 2);
  const GridD b = random_image(24, 18, 3);
  const GridB mask = full_mask(24, 18);
  const SsimResult ab = ssim(a, b, mask);
  const SsimResult ba = ssim(b, a, mask);
  CHECK(std::abs(ab.mean - ba.mean) <= 1e-12);
  for (size_t k = 0; k < ab.map.data.size(); ++k) {
    CHECK(std::abs(ab.map.data[k] - ba.map.data[k]) <= 1e-12);
    CHECK(ab.map.data[k] >= -1.0 - 1e-12);
    CHECK(ab.map.data[k] <= 1.0 + 1e-12);
  }
}

TEST_CASE("reconstruction loss basics") {
  const GridD img = random_image(12, 12, 4);
  const GridB mask = full_mask(12, 12);
  CHECK(recon_loss(img, img, mask) == doctest::Approx(0.0).epsilon(1e-12));

  const GridD other = random_image(12, 12, 5);
  LossOptions pure_ssim;
  pure_ssim.beta = 1.0;
  LossOptions pure_l1;
  pure_l1.beta = 0.0;
  const double s = 1.0 - ssim(img, other, mask).mean;
  CHECK(recon_loss(img, other, mask, pure_ssim) == doctest::Approx(s).epsilon(1e-12));
  double l1 = 0.0;
  for (size_t k = 0; k < img.data.size(); ++k)
    l1 += std::abs(img.data[k] - other.data[k]);
  l1 /= double(img.data.size());
  CHECK(recon_loss(img, other, mask, pure_l1) == doctest::Approx(l1).epsilon(1e-12));

  CHECK(recon_loss(img, other, mask) >= 0.0);
  GridB empty(12, 12, 0);
  CHECK_THROWS_AS(recon_loss(img, other, empty), std::invalid_argument);
  CHECK_THROWS_AS(ssim(img, other, empty), std::invalid_argument);
}

TEST_CASE("smoothness: constants, ramps and edge-aware down-weighting") {
  const int h = 16, w = 16;
  const GridB mask = full_mask(h, w);
  GridD flat_img(h, w, 0.5);

  ElevationMap constant(h, w);
  constant.valid = mask;
  for (double& v : constant.phi.data) v = 0.07;
  CHECK(smooth_loss(constant, flat_img, mask) == doctest::Approx(0.0));

  // Linear ramp along range on a constant image: loss equals |slope|.
  const double slope = 0.004;
  ElevationMap ramp(h, w);
  ramp.valid = mask;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) ramp.phi.at(i, j) = slope * i;
  CHECK(smooth_loss(ramp, flat_img, mask) == doctest::Approx(slope).epsilon(1e-12));

  // Constant shift under a full mask changes nothing.
  ElevationMap shifted = ramp;
  for (double& v : shifted.phi.data) v += 0.05;
  CHECK(smooth_loss(shifted, flat_img, mask) ==
        doctest::Approx(smooth_loss(ramp, flat_img, mask)).epsilon(1e-12));

  // A strong aligned image edge down-weights the same ramp.
  GridD edge_img(h, w, 0.0);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) edge_img.at(i, j) = (i % 2) ? 0.9 : 0.1;
  CHECK(smooth_loss(ramp, edge_img, mask) < smooth_loss(ramp, flat_img, mask));

  CHECK_THROWS_AS(smooth_loss(ramp, flat_img, GridB(h, w, 0)),
                  std::invalid_argument);
}

TEST_CASE("total loss arithmetic and weight identity") {
  const int h = 14, w = 14;
  const GridD target = random_image(h, w, 6);
  ElevationMap elev(h, w);
  elev.valid = full_mask(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) elev.phi.at(i, j) = 0.001 * (i - j);

  WarpResult warp;
  warp.synth = random_image(h, w, 7);
  warp.in_bounds = full_mask(h, w);
  warp.jacobian = GridD(h, w, 0.5);

  const LossBreakdown lb = total_loss(target, warp, elev, full_mask(h, w));
  CHECK(lb.total ==
        doctest::Approx(lb.lambda_r * lb.recon + lb.lambda_s * lb.smooth)
            .epsilon(1e-12));
  CHECK(lb.lambda_r == 2.0);
  CHECK(lb.lambda_s == 1.0);
  // Weighted-sum spot value with the paper weights.
  CHECK(2.0 * 0.1 + 1.0 * 0.02 == doctest::Approx(0.22));
}

TEST_CASE("zero-gradient fixed point") {
  const int h = 12, w = 12;
  const GridD img = random_image(h, w, 8);
  ElevationMap constant(h, w);
  constant.valid = full_mask(h, w);
  for (double& v : constant.phi.data) v = 0.03;

  WarpResult warp;
  warp.synth = img;  // identical reconstruction
  warp.in_bounds = full_mask(h, w);
  warp.jacobian = GridD(h, w, 0.0);  // identity warp has zero jacobian

  const LossBreakdown lb = total_loss(img, warp, constant, full_mask(h, w));
  CHECK(lb.total == doctest::Approx(0.0).epsilon(1e-12));
  for (double g : lb.grad_total.data) CHECK(g == 0.0);
}

TEST_CASE("recon gradient matches finite differences through SSIM windows") {
  const int h = 20, w = 20;
  const GridD target = random_image(h, w, 9);
  GridD synth = random_image(h, w, 10);
  // Smooth the synth a little so |target - synth| has no accidental ties.
  const GridB mask = full_mask(h, w);
  GridD grad;
  const LossOptions opts;
  recon_loss(target, synth, mask, opts, &grad);

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> ui(0, h - 1), uj(0, w - 1);
  const double step = 1e-6;
  for (int trial = 0; trial < 60; ++trial) {
    const int i = ui(rng), j = uj(rng);
    GridD up = synth, down = synth;
    up.at(i, j) += step;
    down.at(i, j) -= step;
    const double fd = (recon_loss(target, up, mask, opts) -
                       recon_loss(target, down, mask, opts)) /
                      (2 * step);
    CHECK(grad.at(i, j) == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("smooth gradient matches finite differences") {
  const int h = 16, w = 16;
  const GridD img = random_image(h, w, 12);
  ElevationMap elev(h, w);
  GridB mask(h, w, 0);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      elev.phi.at(i, j) = u(rng);
      mask.at(i, j) = (i + 2 * j) % 5 != 0;  // ragged mask
    }
  elev.valid = mask;

  GridD grad;
  const LossOptions opts;
  smooth_loss(elev, img, mask, opts, &grad);

  const double step = 1e-7;
  std::uniform_int_distribution<int> ui(0, h - 1), uj(0, w - 1);
  for (int trial = 0; trial < 60; ++trial) {
    const int i = ui(rng), j = uj(rng);
    ElevationMap up = elev, down = elev;
    up.phi.at(i, j) += step;
    down.phi.at(i, j) -= step;
    const double fd = (smooth_loss(up, img, mask, opts) -
                       smooth_loss(down, img, mask, opts)) /
                      (2 * step);
    CHECK(grad.at(i, j) == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("straddling-window policy flag") {
  const int h = 20, w = 20;
  const GridD a = random_image(h, w, 14);
  const GridD b = random_image(h, w, 15);
  GridB half(h, w, 0);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w / 2; ++j) half.at(i, j) = 1;

  LossOptions keep;
  LossOptions drop;
  drop.drop_straddling_windows = true;
  const SsimResult with = ssim(a, b, half, keep);
  const SsimResult without = ssim(a, b, half, drop);
  // Dropping boundary windows changes the mean but keeps the map.
  for (size_t k = 0; k < with.map.data.size(); ++k)
    CHECK(with.map.data[k] == without.map.data[k]);
  CHECK(with.mean != without.mean);
}

TEST_CASE("psnr basics") {
  const GridD img = random_image(10, 10, 16);
  CHECK(std::isinf(psnr(img, img, full_mask(10, 10))));
  GridD noisy = img;
  for (double& v : noisy.data) v += 0.01;
  const double p = psnr(img, noisy, full_mask(10, 10));
  CHECK(p == doctest::Approx(40.0).epsilon(1e-6));
}
