#pragma once

#include <string>
#include <vector>

#include "freqmix/image.hpp"

namespace freqmix {

enum class Enhancer { Unsharp, None, External };

std::string to_string(Enhancer e);
Enhancer enhancer_from_string(const std::string& name);

struct VariantConfig {
  std::vector<int> scales{2, 3, 4};
  Enhancer enhancer = Enhancer::Unsharp;
  double unsharp_radius = 1.5;
  double unsharp_amount = 0.8;

  void validate() const;
};

/// Catmull-Rom (a = -0.5) cubic convolution weight.
double catmull_rom(double x);

/// Separable bicubic resampling with edge clamping. The result is clamped to [0,1].
Image resample_bicubic(const Image& img, Index out_height, Index out_width);

/// Separable Gaussian blur, kernel truncated at 3 sigma and renormalized, edges clamped.
Image gaussian_blur(const Image& img, double sigma);

/// clamp(img + amount * (img - blur(img, radius)))
Image unsharp_mask(const Image& img, double radius, double amount);

/// Up-sample by each scale, enhance, down-sample back. External enhancers are
/// supplied as files by the CLI and are rejected here.
std::vector<Image> make_variant_set(const Image& original, const VariantConfig& cfg);

}  // namespace freqmix
