#include "freqmix/image.hpp"

#include <algorithm>

namespace freqmix {

Image clamped(const Image& img) {
  Image out = img;
  for (auto& p : out.planes()) p = p.max(0.0).min(1.0);
  return out;
}

double max_abs_diff(const Image& a, const Image& b) {
  require(a.same_shape(b), ErrorKind::InvalidParameter, "max_abs_diff: shape mismatch");
  double m = 0.0;
  for (Index c = 0; c < a.channels(); ++c) m = std::max(m, (a[c] - b[c]).abs().maxCoeff());
  return m;
}

bool all_finite(const Image& img) {
  return std::all_of(img.planes().begin(), img.planes().end(),
                     [](const Plane& p) { return p.allFinite(); });
}

}  // namespace freqmix
