#pragma once

#include <Eigen/Core>

#include "freqmix/image.hpp"
#include "freqmix/spectral.hpp"

namespace freqmix {

/// PSNR reported for identical images.
constexpr double kPsnrCap = 150.0;

/// 10 log10(1 / MSE) for intensities in [0,1].
double psnr(const Image& a, const Image& b);

constexpr Index kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;

/// Mean SSIM over all valid 11x11 Gaussian-weighted windows, averaged over channels.
double ssim(const Image& a, const Image& b);

/// Spectral energy captured by each basis mask: sum over bins and channels of R_b |X|^2.
struct BandEnergyProfile {
  Eigen::VectorXd energies;
  Index size() const { return energies.size(); }
};

BandEnergyProfile band_energy_profile(const Image& img, const BasisBank& bank);

}  // namespace freqmix
