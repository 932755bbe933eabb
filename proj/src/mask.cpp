#include "fls/mask.hpp"

#include <stdexcept>
#include <vector>

namespace fls {

SignalMask binarize(const PolarImage& image, double threshold,
                    int min_component) {
  if (threshold < 0.0 || threshold > 1.0)
    throw std::invalid_argument("binarize: threshold must be in [0,1]");
  const int h = image.h(), w = image.w();
  SignalMask mask(h, w);
  mask.threshold = threshold;
  for (size_t k = 0; k < image.intensity.data.size(); ++k)
    mask.valid.data[k] = image.intensity.data[k] > threshold ? 1 : 0;
  if (min_component <= 1) return mask;

  // Flood fill per component, drop those below the size floor.
  std::vector<int32_t> label(size_t(h) * w, -1);
  std::vector<size_t> stack;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const size_t start = size_t(i) * w + j;
      if (!mask.valid.data[start] || label[start] >= 0) continue;
      stack.clear();
      stack.push_back(start);
      label[start] = 0;
      std::vector<size_t> members;
      while (!stack.empty()) {
        const size_t k = stack.back();
        stack.pop_back();
        members.push_back(k);
        const int ki = int(k / w), kj = int(k % w);
        const int ni[4] = {ki - 1, ki + 1, ki, ki};
        const int nj[4] = {kj, kj, kj - 1, kj + 1};
        for (int n = 0; n < 4; ++n) {
          if (ni[n] < 0 || ni[n] >= h || nj[n] < 0 || nj[n] >= w) continue;
          const size_t nk = size_t(ni[n]) * w + nj[n];
          if (mask.valid.data[nk] && label[nk] < 0) {
            label[nk] = 0;
            stack.push_back(nk);
          }
        }
      }
      if (int(members.size()) < min_component)
        for (size_t k : members) mask.valid.data[k] = 0;
    }
  }
  return mask;
}

}  // namespace fls
