#pragma once

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

#include "freqmix/image.hpp"
#include "freqmix/spectral.hpp"

namespace freqmix {

/// Native, differentiable stand-ins for no-reference quality models.
enum class ProxyId {
  HighFrequencyRatio,  // share of spectral energy beyond 0.25 * d_max
  Tenengrad,           // mean squared 3x3 Sobel gradient magnitude
  LaplacianVariance,   // variance of the 3x3 Laplacian response
};

std::string to_string(ProxyId id);
ProxyId proxy_from_string(const std::string& name);

struct ProxyTerm {
  ProxyId id;
  double weight = 1.0;
  // normalized = (raw - offset) / scale
  double offset = 0.0;
  double scale = 1.0;
};

struct ProxySpec {
  std::vector<ProxyTerm> terms;

  /// All three built-in proxies, weight 1, corpus-calibrated scales.
  static ProxySpec defaults();
  void validate() const;
};

constexpr double kHighFrequencyCutoff = 0.25;

// Default normalization scales (normalized = raw / scale). Chosen with
// tools/calibrate_proxies on the bundled corpus: the summed normalized gain of the
// sharpest default variant matches its MSE cost, so lambda = 0.5 is the balance point.
constexpr double kHfRatioScale = 50.0;
constexpr double kTenengradScale = 1400.0;
constexpr double kLaplacianScale = 50.0;

/// Raw (unnormalized) proxy value. The image is used as given; callers clamp.
double raw_proxy(const Image& img, ProxyId id);

/// Raw proxy value plus its gradient with respect to every pixel.
double raw_proxy_with_gradient(const Image& img, ProxyId id, Image& grad);

/// Weighted sum of normalized proxies on the clamped image; higher is sharper.
double perceptual_proxy_score(const Image& img, const ProxySpec& spec);

double perceptual_loss(const Image& img, const ProxySpec& spec);

/// Mean squared error over all pixels and channels.
double recon_loss(const Image& fused, const Image& original);

struct LossReport {
  double recon = 0.0;
  double percep = 0.0;
  double composite = 0.0;
  double lambda = 0.0;
};

void check_lambda(double lambda);

LossReport composite_loss(const Image& fused, const Image& original, double lambda,
                          const ProxySpec& spec);

/// dL/dc, same layout as Coefficients.
struct CoeffGradient {
  Eigen::MatrixXd g;
};

/// The composite loss as a function of the coefficient matrix for a fixed set of
/// source images. Source spectra are computed once; evaluation is const and may be
/// called concurrently.
class FusionObjective {
 public:
  FusionObjective(std::span<const Image> images, const BasisBank& bank, double lambda,
                  ProxySpec spec);

  Index sources() const { return static_cast<Index>(spectra_.size()); }
  Index bands() const { return class_basis_.cols(); }
  double lambda() const { return lambda_; }
  const Image& original() const { return original_; }

  /// Loss at `coeffs`; fills `grad` when non-null.
  LossReport evaluate(const Coefficients& coeffs, CoeffGradient* grad = nullptr) const;

  /// Fused image (unclamped) at `coeffs`.
  Image fused(const Coefficients& coeffs) const;

 private:
  Eigen::MatrixXd class_masks(const Coefficients& coeffs) const;
  Image fuse(const Eigen::MatrixXd& masks, std::vector<ComplexPlane>* spectra = nullptr) const;
  // Perceptual proxy score of the clamped fused image. Gradients are split between
  // pixel space (`grad`) and frequency space (`grad_hat`, per channel, may stay empty).
  double score(const Image& fused_img, const std::vector<ComplexPlane>& spectra, Image* grad,
               std::vector<ComplexPlane>* grad_hat) const;

  Image original_;
  std::vector<Spectrum> spectra_;
  RadialClasses classes_;
  Eigen::MatrixXd class_basis_;  // classes x B
  Plane hf_select_;              // 1 beyond the high-frequency cutoff
  double lambda_;
  ProxySpec spec_;
};

CoeffGradient loss_gradient_wrt_coeffs(std::span<const Image> images, const Coefficients& coeffs,
                                       const BasisBank& bank, double lambda,
                                       const ProxySpec& spec);

}  // namespace freqmix
