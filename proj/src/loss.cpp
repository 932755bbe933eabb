#include "fls/loss.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fls {

namespace {

// Summed-area table; window_sum uses inclusive corner indices.
struct BoxSum {
  int h = 0, w = 0;
  std::vector<double> sat;  // (h+1) x (w+1)

  void build(const GridD& src) {
    h = src.h;
    w = src.w;
    sat.assign(size_t(h + 1) * (w + 1), 0.0);
    for (int i = 0; i < h; ++i) {
      double rowsum = 0.0;
      for (int j = 0; j < w; ++j) {
        rowsum += src.at(i, j);
        sat[size_t(i + 1) * (w + 1) + j + 1] =
            sat[size_t(i) * (w + 1) + j + 1] + rowsum;
      }
    }
  }

  double window(int i0, int i1, int j0, int j1) const {
    return sat[size_t(i1 + 1) * (w + 1) + j1 + 1] -
           sat[size_t(i0) * (w + 1) + j1 + 1] -
           sat[size_t(i1 + 1) * (w + 1) + j0] +
           sat[size_t(i0) * (w + 1) + j0];
  }
};

struct WindowBounds {
  int i0, i1, j0, j1, n;
};

WindowBounds window_at(int i, int j, int h, int w, int radius) {
  WindowBounds b;
  b.i0 = std::max(0, i - radius);
  b.i1 = std::min(h - 1, i + radius);
  b.j0 = std::max(0, j - radius);
  b.j1 = std::min(w - 1, j + radius);
  b.n = (b.i1 - b.i0 + 1) * (b.j1 - b.j0 + 1);
  return b;
}

size_t masked_count(const GridB& mask) {
  size_t n = 0;
  for (uint8_t v : mask.data) n += (v != 0);
  return n;
}

// Shared SSIM machinery: per-pixel map, masked mean (honoring the
// straddling-window policy) and optionally the gradient of the masked mean
// with respect to image b.
struct SsimWork {
  GridD map;
  GridB eligible;  // windows contributing to the masked mean
  size_t n_eligible = 0;
  double mean = 0.0;

  void compute(const GridD& a, const GridD& b, const GridB& mask,
               const LossOptions& opts, GridD* grad_b) {
    const int h = a.h, w = a.w;
    const int radius = opts.ssim_window / 2;
    const double c1 = opts.ssim_c1, c2 = opts.ssim_c2;

    GridD aa(h, w), bb(h, w), ab(h, w);
    for (size_t k = 0; k < a.data.size(); ++k) {
      aa.data[k] = a.data[k] * a.data[k];
      bb.data[k] = b.data[k] * b.data[k];
      ab.data[k] = a.data[k] * b.data[k];
    }
    GridD mask_d(h, w);
    for (size_t k = 0; k < mask.data.size(); ++k)
      mask_d.data[k] = mask.data[k] ? 1.0 : 0.0;

    BoxSum sa, sb, saa, sbb, sab, sm;
    sa.build(a);
    sb.build(b);
    saa.build(aa);
    sbb.build(bb);
    sab.build(ab);
    sm.build(mask_d);

    map = GridD(h, w, 0.0);
    eligible = GridB(h, w, 0);
    n_eligible = 0;
    double acc = 0.0;

    // Per-window coefficient maps for the gradient: dS(k)/db(q) =
    // (P(k) + Q(k) b... see below) / n_k for q in the window of k.
    GridD pn, qn, rn;
    if (grad_b) {
      pn = GridD(h, w, 0.0);
      qn = GridD(h, w, 0.0);
      rn = GridD(h, w, 0.0);
    }

    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const WindowBounds wb = window_at(i, j, h, w, radius);
        const double inv_n = 1.0 / wb.n;
        const double mu_a = sa.window(wb.i0, wb.i1, wb.j0, wb.j1) * inv_n;
        const double mu_b = sb.window(wb.i0, wb.i1, wb.j0, wb.j1) * inv_n;
        const double var_a =
            saa.window(wb.i0, wb.i1, wb.j0, wb.j1) * inv_n - mu_a * mu_a;
        const double var_b =
            sbb.window(wb.i0, wb.i1, wb.j0, wb.j1) * inv_n - mu_b * mu_b;
        const double cov =
            sab.window(wb.i0, wb.i1, wb.j0, wb.j1) * inv_n - mu_a * mu_b;
        const double a1 = 2.0 * mu_a * mu_b + c1;
        const double a2 = 2.0 * cov + c2;
        const double b1 = mu_a * mu_a + mu_b * mu_b + c1;
        const double b2 = var_a + var_b + c2;
        const double s = (a1 * a2) / (b1 * b2);
        map.at(i, j) = s;

        bool use = mask.at(i, j) != 0;
        if (use && opts.drop_straddling_windows) {
          const double m_in = sm.window(wb.i0, wb.i1, wb.j0, wb.j1);
          use = m_in >= double(wb.n) - 0.5;
        }
        if (use) {
          eligible.at(i, j) = 1;
          ++n_eligible;
          acc += s;
        }

        if (grad_b && use) {
          // dS/db(q) = (1/n) [P + Q a(q) + R b(q)] for q in the window:
          //   P = 2 mu_a a2 D - 2 mu_b S / b1 - 2 mu_a a1 D + 2 mu_b S / b2
          //   Q = 2 a1 D,  R = -2 S / b2,  D = 1/(b1 b2)
          const double d = 1.0 / (b1 * b2);
          const double p = 2.0 * mu_a * a2 * d - 2.0 * mu_b * s / b1 -
                           2.0 * mu_a * a1 * d + 2.0 * mu_b * s / b2;
          pn.at(i, j) = p * inv_n;
          qn.at(i, j) = 2.0 * a1 * d * inv_n;
          rn.at(i, j) = -2.0 * s / b2 * inv_n;
        }
      }
    }

    if (n_eligible == 0)
      throw std::invalid_argument("ssim: empty mask, mean undefined");
    mean = acc / double(n_eligible);

    if (grad_b) {
      // Gather over all windows containing q (window adjacency is
      // symmetric): grad(q) = [BS(pn) + a(q) BS(qn) + b(q) BS(rn)] / N.
      BoxSum bp, bq, br;
      bp.build(pn);
      bq.build(qn);
      br.build(rn);
      *grad_b = GridD(h, w, 0.0);
      const double inv_count = 1.0 / double(n_eligible);
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
          const WindowBounds wb = window_at(i, j, h, w, radius);
          const double g =
              bp.window(wb.i0, wb.i1, wb.j0, wb.j1) +
              a.at(i, j) * bq.window(wb.i0, wb.i1, wb.j0, wb.j1) +
              b.at(i, j) * br.window(wb.i0, wb.i1, wb.j0, wb.j1);
          grad_b->at(i, j) = g * inv_count;
        }
    }
  }
};

void check_shapes(const GridD& a, const GridD& b, const GridB& mask,
                  const char* who) {
  if (a.h != b.h || a.w != b.w || a.h != mask.h || a.w != mask.w)
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

}  // namespace

SsimResult ssim(const GridD& a, const GridD& b, const GridB& mask,
                const LossOptions& opts) {
  check_shapes(a, b, mask, "ssim");
  SsimWork work;
  work.compute(a, b, mask, opts, nullptr);
  return {std::move(work.map), work.mean};
}

SsimResult ssim(const PolarImage& a, const PolarImage& b, const GridB& mask,
                const LossOptions& opts) {
  return ssim(a.intensity, b.intensity, mask, opts);
}

double recon_loss(const GridD& target, const GridD& synth, const GridB& mask,
                  const LossOptions& opts, GridD* grad_synth) {
  check_shapes(target, synth, mask, "recon_loss");
  if (opts.beta < 0.0 || opts.beta > 1.0)
    throw std::invalid_argument("recon_loss: beta must be in [0,1]");
  SsimWork work;
  GridD ssim_grad;
  work.compute(target, synth, mask, opts, grad_synth ? &ssim_grad : nullptr);

  const size_t n_mask = masked_count(mask);
  if (n_mask == 0) throw std::invalid_argument("recon_loss: empty mask");
  double l1 = 0.0;
  for (size_t k = 0; k < target.data.size(); ++k)
    if (mask.data[k]) l1 += std::abs(target.data[k] - synth.data[k]);
  l1 /= double(n_mask);

  const double loss = opts.beta * (1.0 - work.mean) + (1.0 - opts.beta) * l1;

  if (grad_synth) {
    *grad_synth = GridD(target.h, target.w, 0.0);
    const double l1_scale = (1.0 - opts.beta) / double(n_mask);
    for (size_t k = 0; k < target.data.size(); ++k) {
      double g = -opts.beta * ssim_grad.data[k];
      if (mask.data[k]) {
        const double diff = synth.data[k] - target.data[k];
        g += l1_scale * (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0));
      }
      grad_synth->data[k] = g;
    }
  }
  return loss;
}

double smooth_loss(const ElevationMap& elevation, const GridD& intensity,
                   const GridB& mask, const LossOptions& opts,
                   GridD* grad_elev) {
  const GridD& e = elevation.phi;
  check_shapes(e, intensity, mask, "smooth_loss");
  if (masked_count(mask) == 0)
    throw std::invalid_argument("smooth_loss: empty mask");
  const int h = e.h, w = e.w;

  if (grad_elev) *grad_elev = GridD(h, w, 0.0);

  auto masked_e = [&](int i, int j) {
    return mask.at(i, j) ? e.at(i, j) : 0.0;
  };

  // One pass per axis: positions are counted where the mask holds at the
  // difference origin (optionally requiring both endpoints inside).
  double sum_r = 0.0, sum_t = 0.0;
  size_t n_r = 0, n_t = 0;
  struct Term {
    int i, j, di, dj;
    double weight, diff;
  };
  std::vector<Term> terms;
  if (grad_elev) terms.reserve(size_t(h) * w * 2);

  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (!mask.at(i, j)) continue;
      if (i + 1 < h &&
          !(opts.exclude_mask_boundary && mask.at(i + 1, j) != mask.at(i, j))) {
        const double diff = masked_e(i + 1, j) - masked_e(i, j);
        const double weight =
            std::exp(-std::abs(intensity.at(i + 1, j) - intensity.at(i, j)));
        sum_r += std::abs(diff) * weight;
        ++n_r;
        if (grad_elev) terms.push_back({i, j, 1, 0, weight, diff});
      }
      if (j + 1 < w &&
          !(opts.exclude_mask_boundary && mask.at(i, j + 1) != mask.at(i, j))) {
        const double diff = masked_e(i, j + 1) - masked_e(i, j);
        const double weight =
            std::exp(-std::abs(intensity.at(i, j + 1) - intensity.at(i, j)));
        sum_t += std::abs(diff) * weight;
        ++n_t;
        if (grad_elev) terms.push_back({i, j, 0, 1, weight, diff});
      }
    }
  }

  const double loss = (n_r ? sum_r / double(n_r) : 0.0) +
                      (n_t ? sum_t / double(n_t) : 0.0);

  if (grad_elev) {
    for (const Term& t : terms) {
      if (t.diff == 0.0) continue;
      const double sgn = t.diff > 0.0 ? 1.0 : -1.0;
      const double scale =
          t.weight * sgn / double(t.di ? n_r : n_t);
      const int i2 = t.i + t.di, j2 = t.j + t.dj;
      if (mask.at(i2, j2)) grad_elev->at(i2, j2) += scale;
      grad_elev->at(t.i, t.j) -= scale;  // mask at (i,j) holds by construction
    }
  }
  return loss;
}

LossBreakdown total_loss(const GridD& target, const WarpResult& warp,
                         const ElevationMap& elevation, const GridB& mask,
                         const LossOptions& opts) {
  if (mask.h != target.h || mask.w != target.w)
    throw std::invalid_argument("total_loss: mask shape mismatch");
  GridB recon_mask(target.h, target.w, 0);
  for (size_t k = 0; k < recon_mask.data.size(); ++k)
    recon_mask.data[k] = (mask.data[k] && warp.in_bounds.data[k]) ? 1 : 0;

  LossBreakdown out;
  out.beta = opts.beta;
  out.lambda_r = opts.lambda_r;
  out.lambda_s = opts.lambda_s;

  GridD grad_synth;
  out.recon = recon_loss(target, warp.synth, recon_mask, opts, &grad_synth);
  GridD grad_smooth;
  out.smooth = smooth_loss(elevation, target, mask, opts, &grad_smooth);
  out.total = opts.lambda_r * out.recon + opts.lambda_s * out.smooth;

  out.grad_total = GridD(target.h, target.w, 0.0);
  for (size_t k = 0; k < out.grad_total.data.size(); ++k)
    out.grad_total.data[k] =
        opts.lambda_r * grad_synth.data[k] * warp.jacobian.data[k] +
        opts.lambda_s * grad_smooth.data[k];
  return out;
}

double psnr(const GridD& a, const GridD& b, const GridB& mask) {
  check_shapes(a, b, mask, "psnr");
  double mse = 0.0;
  size_t n = 0;
  for (size_t k = 0; k < a.data.size(); ++k) {
    if (!mask.data[k]) continue;
    const double d = a.data[k] - b.data[k];
    mse += d * d;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("psnr: empty mask");
  mse /= double(n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

}  // namespace fls
