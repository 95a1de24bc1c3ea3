#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "freqmix/image.hpp"

namespace freqmix {

/// Signed DFT frequency of index k on an axis of length n (k for k <= n/2, else k - n).
constexpr Index signed_frequency(Index k, Index n) { return k <= n / 2 ? k : k - n; }

/// Radial frequency distance of every bin in unshifted DFT order.
struct DistanceGrid {
  Plane d;
  double d_max = 0.0;  // sqrt(H^2 + W^2) / 2

  Index height() const { return d.rows(); }
  Index width() const { return d.cols(); }
};

DistanceGrid frequency_distance_grid(Index height, Index width);

/// Bins grouped by squared integer radius f_h^2 + f_w^2. Every radially
/// symmetric quantity (basis masks, composed masks) is constant on a class.
struct RadialClasses {
  Index height = 0;
  Index width = 0;
  std::vector<Index> class_of_bin;  // row-major, size H*W
  std::vector<long long> radius_sq;  // per class, ascending
  Eigen::VectorXd bins_per_class;

  Index size() const { return static_cast<Index>(radius_sq.size()); }
};

RadialClasses radial_classes(Index height, Index width);

/// Gaussian ring profile exp(-(d - mu)^2 / (2 spread^2)).
double ring_profile(double d, double mu, double spread);

/// B ring-shaped Gaussian masks with quadratically spaced centers and spreads.
/// `sigmas` holds the nominal schedule in [0.05, 0.55]; the spread actually used
/// is `spreads = sigmas * d_max`.
struct BasisBank {
  std::vector<Plane> masks;
  Eigen::VectorXd mus;
  Eigen::VectorXd sigmas;
  Eigen::VectorXd spreads;
  double d_max = 0.0;

  Index size() const { return static_cast<Index>(masks.size()); }
  Index height() const { return masks.empty() ? 0 : masks[0].rows(); }
  Index width() const { return masks.empty() ? 0 : masks[0].cols(); }

  /// Basis values on each radial class: (classes x B).
  Eigen::MatrixXd class_values(const RadialClasses& classes) const;
};

constexpr double kSigmaFirst = 0.05;
constexpr double kSigmaLast = 0.55;

BasisBank make_basis_bank(const DistanceGrid& grid, Index bands);

/// (N+1) x B mixing coefficients; row 0 belongs to the original image.
class Coefficients {
 public:
  Coefficients() = default;
  Coefficients(Index sources, Index bands);
  explicit Coefficients(Eigen::MatrixXd values);

  Index sources() const { return values_.rows(); }
  Index bands() const { return values_.cols(); }

  Eigen::MatrixXd& values() { return values_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(Index i, Index b) const { return values_(i, b); }
  double& operator()(Index i, Index b) { return values_(i, b); }

  bool operator==(const Coefficients& other) const {
    return values_.rows() == other.values_.rows() && values_.cols() == other.values_.cols() &&
           values_ == other.values_;
  }

 private:
  Eigen::MatrixXd values_;
};

/// Per-bin softmax of basis-weighted scores; the masks sum to one at every bin.
struct MaskSet {
  std::vector<Plane> masks;

  Index sources() const { return static_cast<Index>(masks.size()); }
  Index height() const { return masks.empty() ? 0 : masks[0].rows(); }
  Index width() const { return masks.empty() ? 0 : masks[0].cols(); }
};

/// Stable softmax of each column of `scores` (sources x classes), in place.
void softmax_columns(Eigen::MatrixXd& scores);

MaskSet compose_masks(const Coefficients& coeffs, const BasisBank& bank);

Spectrum forward_spectrum(const Image& img);

/// Largest |X[k] - conj(X[-k])| relative to the largest |X|.
double hermitian_asymmetry(const Spectrum& spec);

constexpr double kSymmetryTolerance = 1e-6;

/// Real part of the unitary inverse transform. Throws SymmetryViolation when the
/// spectrum is not Hermitian to within kSymmetryTolerance (relative).
Image inverse_spectrum(const Spectrum& spec);

/// Largest imaginary magnitude left by the inverse transform of `spec`.
double imaginary_residual(const Spectrum& spec);

/// Sum_i M_i * F(images[i]), per channel.
Spectrum mixed_spectrum(std::span<const Image> images, const MaskSet& masks);

Image frequency_mixup(std::span<const Image> images, const MaskSet& masks);

/// Component i = F^-1(M_i * F(images[i])); components sum to the fused image.
std::vector<Image> decompose_contributions(std::span<const Image> images, const MaskSet& masks);

/// Plane with the DC bin moved to the array center, for display.
Plane centered(const Plane& p);

}  // namespace freqmix
