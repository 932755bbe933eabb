// Signal-mask generation for simulated images: intensity thresholding with
// small-component removal.

#ifndef FLS_MASK_HPP
#define FLS_MASK_HPP

#include "fls/image.hpp"

namespace fls {

/// valid = intensity > threshold, then 4-connected components smaller than
/// min_component pixels are removed. threshold must be in [0,1].
SignalMask binarize(const PolarImage& image, double threshold = 0.05,
                    int min_component = 8);

}  // namespace fls

#endif  // FLS_MASK_HPP
