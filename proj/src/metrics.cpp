#include "freqmix/metrics.hpp"

#include <cmath>

#include "freqmix/objective.hpp"

namespace freqmix {
namespace {

Eigen::VectorXd ssim_window_1d() {
  Eigen::VectorXd k(kSsimWindow);
  const Index half = kSsimWindow / 2;
  for (Index i = 0; i < kSsimWindow; ++i) {
    const auto x = static_cast<double>(i - half);
    k(i) = std::exp(-(x * x) / (2.0 * kSsimSigma * kSsimSigma));
  }
  return k / k.sum();
}

// Gaussian-weighted local mean over every valid window position.
Plane local_mean(const Plane& p, const Eigen::VectorXd& k) {
  const Index n = k.size();
  const Index oh = p.rows() - n + 1;
  const Index ow = p.cols() - n + 1;
  Plane tmp(oh, p.cols());
  for (Index r = 0; r < oh; ++r) {
    for (Index c = 0; c < p.cols(); ++c) {
      double acc = 0.0;
      for (Index j = 0; j < n; ++j) acc += k(j) * p(r + j, c);
      tmp(r, c) = acc;
    }
  }
  Plane out(oh, ow);
  for (Index r = 0; r < oh; ++r) {
    for (Index c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (Index j = 0; j < n; ++j) acc += k(j) * tmp(r, c + j);
      out(r, c) = acc;
    }
  }
  return out;
}

double ssim_plane(const Plane& a, const Plane& b, const Eigen::VectorXd& k) {
  constexpr double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
  constexpr double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);
  const Plane mu_a = local_mean(a, k);
  const Plane mu_b = local_mean(b, k);
  const Plane var_a = local_mean(a * a, k) - mu_a * mu_a;
  const Plane var_b = local_mean(b * b, k) - mu_b * mu_b;
  const Plane cov = local_mean(a * b, k) - mu_a * mu_b;
  const Plane num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
  const Plane den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
  return (num / den).mean();
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  require(a.same_shape(b), ErrorKind::InvalidParameter, "psnr: shape mismatch");
  const double mse = recon_loss(a, b);
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) {
  require(a.same_shape(b), ErrorKind::InvalidParameter, "ssim: shape mismatch");
  require(a.height() >= kSsimWindow && a.width() >= kSsimWindow, ErrorKind::InvalidParameter,
          "ssim needs images of at least 11x11");
  const Eigen::VectorXd k = ssim_window_1d();
  double total = 0.0;
  for (Index c = 0; c < a.channels(); ++c) total += ssim_plane(a[c], b[c], k);
  return total / static_cast<double>(a.channels());
}

BandEnergyProfile band_energy_profile(const Image& img, const BasisBank& bank) {
  require(img.height() == bank.height() && img.width() == bank.width(),
          ErrorKind::InvalidParameter, "band energy: basis bank size does not match image");
  Plane power = Plane::Zero(img.height(), img.width());
  const Spectrum spec = forward_spectrum(img);
  for (const auto& p : spec.planes()) power += p.abs2();
  BandEnergyProfile out;
  out.energies.resize(bank.size());
  for (Index b = 0; b < bank.size(); ++b) out.energies(b) = (bank.masks[b] * power).sum();
  return out;
}

}  // namespace freqmix
