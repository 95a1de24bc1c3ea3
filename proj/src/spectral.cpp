#include "freqmix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "freqmix/fft.hpp"

namespace freqmix {

DistanceGrid frequency_distance_grid(Index height, Index width) {
  require(height >= 2 && width >= 2, ErrorKind::InvalidDimension,
          "frequency grid needs at least 2x2 bins");
  DistanceGrid grid;
  grid.d.resize(height, width);
  for (Index h = 0; h < height; ++h) {
    const auto fh = static_cast<double>(signed_frequency(h, height));
    for (Index w = 0; w < width; ++w) {
      const auto fw = static_cast<double>(signed_frequency(w, width));
      grid.d(h, w) = std::sqrt(fh * fh + fw * fw);
    }
  }
  grid.d_max = std::sqrt(static_cast<double>(height * height + width * width)) / 2.0;
  return grid;
}

RadialClasses radial_classes(Index height, Index width) {
  require(height >= 2 && width >= 2, ErrorKind::InvalidDimension,
          "frequency grid needs at least 2x2 bins");
  RadialClasses rc;
  rc.height = height;
  rc.width = width;
  std::vector<long long> r2(static_cast<std::size_t>(height * width));
  for (Index h = 0; h < height; ++h) {
    const long long fh = signed_frequency(h, height);
    for (Index w = 0; w < width; ++w) {
      const long long fw = signed_frequency(w, width);
      r2[static_cast<std::size_t>(h * width + w)] = fh * fh + fw * fw;
    }
  }
  rc.radius_sq = r2;
  std::sort(rc.radius_sq.begin(), rc.radius_sq.end());
  rc.radius_sq.erase(std::unique(rc.radius_sq.begin(), rc.radius_sq.end()), rc.radius_sq.end());
  std::unordered_map<long long, Index> lookup;
  lookup.reserve(rc.radius_sq.size());
  for (std::size_t u = 0; u < rc.radius_sq.size(); ++u) lookup.emplace(rc.radius_sq[u], u);
  rc.class_of_bin.resize(r2.size());
  rc.bins_per_class = Eigen::VectorXd::Zero(rc.size());
  for (std::size_t k = 0; k < r2.size(); ++k) {
    const Index u = lookup.at(r2[k]);
    rc.class_of_bin[k] = u;
    rc.bins_per_class(u) += 1.0;
  }
  return rc;
}

double ring_profile(double d, double mu, double spread) {
  const double z = d - mu;
  return std::exp(-(z * z) / (2.0 * spread * spread));
}

Eigen::MatrixXd BasisBank::class_values(const RadialClasses& classes) const {
  Eigen::MatrixXd out(classes.size(), size());
  for (Index u = 0; u < classes.size(); ++u) {
    const double d = std::sqrt(static_cast<double>(classes.radius_sq[static_cast<std::size_t>(u)]));
    for (Index b = 0; b < size(); ++b) out(u, b) = ring_profile(d, mus(b), spreads(b));
  }
  return out;
}

BasisBank make_basis_bank(const DistanceGrid& grid, Index bands) {
  require(bands >= 2, ErrorKind::InvalidParameter, "basis bank needs at least 2 bands");
  BasisBank bank;
  bank.d_max = grid.d_max;
  bank.mus.resize(bands);
  bank.sigmas.resize(bands);
  bank.spreads.resize(bands);
  bank.masks.reserve(static_cast<std::size_t>(bands));
  for (Index b = 0; b < bands; ++b) {
    const double t = static_cast<double>(b) / static_cast<double>(bands - 1);
    bank.mus(b) = grid.d_max * t * t;
    bank.sigmas(b) = kSigmaFirst + (kSigmaLast - kSigmaFirst) * t * t;
    bank.spreads(b) = bank.sigmas(b) * grid.d_max;
    const double mu = bank.mus(b);
    const double spread = bank.spreads(b);
    bank.masks.emplace_back(grid.d.unaryExpr([&](double d) { return ring_profile(d, mu, spread); }));
  }
  // Endpoints are pinned exactly rather than left to t*t rounding.
  bank.mus(0) = 0.0;
  bank.mus(bands - 1) = grid.d_max;
  bank.sigmas(bands - 1) = kSigmaLast;
  return bank;
}

Coefficients::Coefficients(Index sources, Index bands) : values_(Eigen::MatrixXd::Zero(sources, bands)) {
  require(sources >= 1 && bands >= 1, ErrorKind::InvalidParameter, "empty coefficient matrix");
}

Coefficients::Coefficients(Eigen::MatrixXd values) : values_(std::move(values)) {
  require(values_.rows() >= 1 && values_.cols() >= 1, ErrorKind::InvalidParameter,
          "empty coefficient matrix");
  require(values_.allFinite(), ErrorKind::InvalidParameter, "coefficients must be finite");
}

void softmax_columns(Eigen::MatrixXd& scores) {
  for (Index u = 0; u < scores.cols(); ++u) {
    auto col = scores.col(u);
    const double peak = col.maxCoeff();
    col = (col.array() - peak).exp().matrix();
    col /= col.sum();
  }
}

MaskSet compose_masks(const Coefficients& coeffs, const BasisBank& bank) {
  require(coeffs.bands() == bank.size(), ErrorKind::InvalidParameter,
          "coefficient band count " + std::to_string(coeffs.bands()) +
              " does not match basis bank size " + std::to_string(bank.size()));
  require(coeffs.values().allFinite(), ErrorKind::InvalidParameter, "coefficients must be finite");
  const Index n = coeffs.sources();
  const Index h = bank.height();
  const Index w = bank.width();
  std::vector<Plane> scores(static_cast<std::size_t>(n), Plane::Zero(h, w));
  for (Index i = 0; i < n; ++i) {
    for (Index b = 0; b < bank.size(); ++b) scores[i] += coeffs(i, b) * bank.masks[b];
  }
  Plane peak = scores[0];
  for (Index i = 1; i < n; ++i) peak = peak.max(scores[i]);
  Plane total = Plane::Zero(h, w);
  for (auto& s : scores) {
    s = (s - peak).exp();
    total += s;
  }
  for (auto& s : scores) s /= total;
  return MaskSet{std::move(scores)};
}

Spectrum forward_spectrum(const Image& img) {
  std::vector<ComplexPlane> planes;
  planes.reserve(static_cast<std::size_t>(img.channels()));
  for (const auto& p : img.planes()) planes.push_back(fft::forward(p));
  return Spectrum(std::move(planes));
}

double hermitian_asymmetry(const Spectrum& spec) {
  double worst = 0.0;
  double scale = 0.0;
  const Index h = spec.height();
  const Index w = spec.width();
  for (const auto& p : spec.planes()) {
    scale = std::max(scale, p.abs().maxCoeff());
    for (Index r = 0; r < h; ++r) {
      const Index rn = (h - r) % h;
      for (Index c = 0; c < w; ++c) {
        const Index cn = (w - c) % w;
        worst = std::max(worst, std::abs(p(r, c) - std::conj(p(rn, cn))));
      }
    }
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

namespace {

Image inverse_real_part(const Spectrum& spec) {
  std::vector<Plane> planes;
  planes.reserve(static_cast<std::size_t>(spec.channels()));
  for (const auto& p : spec.planes()) planes.push_back(fft::inverse(p).real());
  return Image(std::move(planes));
}

void check_mixup_inputs(std::span<const Image> images, const MaskSet& masks) {
  require(!images.empty(), ErrorKind::InvalidParameter, "mixup needs at least one image");
  require(static_cast<Index>(images.size()) == masks.sources(), ErrorKind::InvalidParameter,
          "mixup: " + std::to_string(images.size()) + " images but " +
              std::to_string(masks.sources()) + " masks");
  for (const auto& img : images) {
    require(img.same_shape(images[0]), ErrorKind::InvalidParameter,
            "mixup: images differ in shape");
  }
  require(masks.height() == images[0].height() && masks.width() == images[0].width(),
          ErrorKind::InvalidParameter, "mixup: mask size does not match image size");
}

}  // namespace

Image inverse_spectrum(const Spectrum& spec) {
  const double asym = hermitian_asymmetry(spec);
  require(asym <= kSymmetryTolerance, ErrorKind::SymmetryViolation,
          "spectrum is not Hermitian (relative asymmetry " + std::to_string(asym) + ")");
  return inverse_real_part(spec);
}

double imaginary_residual(const Spectrum& spec) {
  double worst = 0.0;
  for (const auto& p : spec.planes()) worst = std::max(worst, fft::inverse(p).imag().abs().maxCoeff());
  return worst;
}

Spectrum mixed_spectrum(std::span<const Image> images, const MaskSet& masks) {
  check_mixup_inputs(images, masks);
  const Index channels = images[0].channels();
  Spectrum out(images[0].height(), images[0].width(), channels);
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (Index c = 0; c < channels; ++c) {
      out[c] += fft::forward(images[i][c]) * masks.masks[i];
    }
  }
  return out;
}

Image frequency_mixup(std::span<const Image> images, const MaskSet& masks) {
  return inverse_spectrum(mixed_spectrum(images, masks));
}

std::vector<Image> decompose_contributions(std::span<const Image> images, const MaskSet& masks) {
  check_mixup_inputs(images, masks);
  std::vector<Image> parts;
  parts.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    Spectrum s = forward_spectrum(images[i]);
    for (auto& p : s.planes()) p *= masks.masks[i];
    parts.push_back(inverse_spectrum(s));
  }
  return parts;
}

Plane centered(const Plane& p) {
  const Index h = p.rows();
  const Index w = p.cols();
  Plane out(h, w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) out((r + h / 2) % h, (c + w / 2) % w) = p(r, c);
  }
  return out;
}

}  // namespace freqmix
