#pragma once

#include "freqmix/image.hpp"

namespace freqmix::fft {

enum class Direction { Forward, Inverse };

/// Unitary 2-D DFT of one plane (scaled by 1/sqrt(HW) in both directions).
/// Plans are cached per (shape, direction); calls are safe from any thread.
void transform(const ComplexPlane& in, ComplexPlane& out, Direction dir);

ComplexPlane forward(const Plane& in);
ComplexPlane forward(const ComplexPlane& in);
ComplexPlane inverse(const ComplexPlane& in);

}  // namespace freqmix::fft
