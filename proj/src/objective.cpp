#include "freqmix/objective.hpp"

#include <array>
#include <cmath>

#include "freqmix/fft.hpp"

namespace freqmix {
namespace {

using Kernel3 = std::array<std::array<double, 3>, 3>;

constexpr Kernel3 kSobelX{{{-1.0, 0.0, 1.0}, {-2.0, 0.0, 2.0}, {-1.0, 0.0, 1.0}}};
constexpr Kernel3 kSobelY{{{-1.0, -2.0, -1.0}, {0.0, 0.0, 0.0}, {1.0, 2.0, 1.0}}};
constexpr Kernel3 kLaplacian{{{0.0, 1.0, 0.0}, {1.0, -4.0, 1.0}, {0.0, 1.0, 0.0}}};

// Copy of x with one replicated border row/column on every side.
Plane replicate_pad(const Plane& x) {
  const Index h = x.rows();
  const Index w = x.cols();
  Plane p(h + 2, w + 2);
  p.block(1, 1, h, w) = x;
  p.block(0, 1, 1, w) = x.row(0);
  p.block(h + 1, 1, 1, w) = x.row(h - 1);
  p.col(0) = p.col(1);
  p.col(w + 1) = p.col(w);
  return p;
}

// 3x3 correlation with replicated borders.
Plane correlate(const Plane& x, const Kernel3& k) {
  const Index h = x.rows();
  const Index w = x.cols();
  const Plane p = replicate_pad(x);
  Plane out = Plane::Zero(h, w);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (k[a][b] != 0.0) out += k[a][b] * p.block(a, b, h, w);
    }
  }
  return out;
}

// Adjoint of correlate(): scatters each output sensitivity onto the padded taps,
// then folds the padding back onto the border pixels it replicated.
void correlate_adjoint(const Plane& g, const Kernel3& k, Plane& acc) {
  const Index h = g.rows();
  const Index w = g.cols();
  Plane p = Plane::Zero(h + 2, w + 2);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (k[a][b] != 0.0) p.block(a, b, h, w) += k[a][b] * g;
    }
  }
  p.col(1) += p.col(0);
  p.col(w) += p.col(w + 1);
  p.row(1) += p.row(0);
  p.row(h) += p.row(h + 1);
  acc += p.block(1, 1, h, w);
}

Plane high_frequency_selector(Index h, Index w) {
  const DistanceGrid grid = frequency_distance_grid(h, w);
  const double cutoff = kHighFrequencyCutoff * grid.d_max;
  return (grid.d > cutoff).cast<double>();
}

double hf_ratio(const Image& img, Image* grad) {
  const Plane select = high_frequency_selector(img.height(), img.width());
  double e_hf = 0.0;
  double e_tot = 0.0;
  std::vector<ComplexPlane> spectra;
  for (const auto& p : img.planes()) {
    ComplexPlane y = fft::forward(p);
    const Plane power = y.abs2();
    e_hf += (power * select).sum();
    e_tot += power.sum();
    if (grad) spectra.push_back(std::move(y));
  }
  if (e_tot <= 0.0) {
    if (grad) *grad = Image(img.height(), img.width(), img.channels());
    return 0.0;
  }
  const double ratio = e_hf / e_tot;
  if (grad) {
    // d(E_hf)/dx = 2 Re F^-1(P Y), d(E_tot)/dx = 2x
    *grad = Image(img.height(), img.width(), img.channels());
    for (Index c = 0; c < img.channels(); ++c) {
      const ComplexPlane masked = spectra[c] * select;
      const Plane d_hf = 2.0 * fft::inverse(masked).real();
      (*grad)[c] = (d_hf - ratio * 2.0 * img[c]) / e_tot;
    }
  }
  return ratio;
}

// hf_ratio() from the unitary spectra of an image. `grad_hat`, when given, receives
// the spectra of the pixel gradient: F(2 Re F^-1(P Y) - 2 ratio x) / E_tot.
double hf_ratio_spectral(const std::vector<ComplexPlane>& spectra, const Plane& select,
                         std::vector<ComplexPlane>* grad_hat) {
  double e_hf = 0.0;
  double e_tot = 0.0;
  for (const auto& y : spectra) {
    const Plane power = y.abs2();
    e_hf += (power * select).sum();
    e_tot += power.sum();
  }
  if (grad_hat) grad_hat->clear();
  if (e_tot <= 0.0) {
    if (grad_hat) {
      for (const auto& y : spectra) grad_hat->push_back(ComplexPlane::Zero(y.rows(), y.cols()));
    }
    return 0.0;
  }
  const double ratio = e_hf / e_tot;
  if (grad_hat) {
    for (const auto& y : spectra) grad_hat->push_back(y * ((2.0 / e_tot) * (select - ratio)));
  }
  return ratio;
}

double tenengrad(const Image& img, Image* grad) {
  const double n = static_cast<double>(img.pixel_count() * img.channels());
  double total = 0.0;
  if (grad) *grad = Image(img.height(), img.width(), img.channels());
  for (Index c = 0; c < img.channels(); ++c) {
    const Plane gx = correlate(img[c], kSobelX);
    const Plane gy = correlate(img[c], kSobelY);
    total += (gx.square() + gy.square()).sum();
    if (grad) {
      correlate_adjoint((2.0 / n) * gx, kSobelX, (*grad)[c]);
      correlate_adjoint((2.0 / n) * gy, kSobelY, (*grad)[c]);
    }
  }
  return total / n;
}

double laplacian_variance(const Image& img, Image* grad) {
  const double n = static_cast<double>(img.pixel_count() * img.channels());
  std::vector<Plane> responses;
  double sum = 0.0;
  for (const auto& p : img.planes()) {
    responses.push_back(correlate(p, kLaplacian));
    sum += responses.back().sum();
  }
  const double mean = sum / n;
  double var = 0.0;
  for (const auto& r : responses) var += (r - mean).square().sum();
  var /= n;
  if (grad) {
    *grad = Image(img.height(), img.width(), img.channels());
    for (Index c = 0; c < img.channels(); ++c) {
      correlate_adjoint((2.0 / n) * (responses[c] - mean), kLaplacian, (*grad)[c]);
    }
  }
  return var;
}

double dispatch(const Image& img, ProxyId id, Image* grad) {
  switch (id) {
    case ProxyId::HighFrequencyRatio: return hf_ratio(img, grad);
    case ProxyId::Tenengrad: return tenengrad(img, grad);
    case ProxyId::LaplacianVariance: return laplacian_variance(img, grad);
  }
  fail(ErrorKind::InvalidParameter, "unknown proxy");
}

// Weighted normalized score of an already clamped image, with optional gradient.
double proxy_score(const Image& x, const ProxySpec& spec, Image* grad) {
  double score = 0.0;
  if (grad) *grad = Image(x.height(), x.width(), x.channels());
  Image term_grad;
  for (const auto& t : spec.terms) {
    if (t.weight == 0.0) continue;
    const double raw = dispatch(x, t.id, grad ? &term_grad : nullptr);
    score += t.weight * (raw - t.offset) / t.scale;
    if (grad) {
      for (Index c = 0; c < x.channels(); ++c) (*grad)[c] += (t.weight / t.scale) * term_grad[c];
    }
  }
  return score;
}

}  // namespace

std::string to_string(ProxyId id) {
  switch (id) {
    case ProxyId::HighFrequencyRatio: return "hf_ratio";
    case ProxyId::Tenengrad: return "tenengrad";
    case ProxyId::LaplacianVariance: return "laplacian_var";
  }
  return "unknown";
}

ProxyId proxy_from_string(const std::string& name) {
  if (name == "hf_ratio") return ProxyId::HighFrequencyRatio;
  if (name == "tenengrad") return ProxyId::Tenengrad;
  if (name == "laplacian_var") return ProxyId::LaplacianVariance;
  fail(ErrorKind::InvalidParameter, "unknown proxy '" + name + "'");
}

ProxySpec ProxySpec::defaults() {
  return ProxySpec{{
      {ProxyId::HighFrequencyRatio, 1.0, 0.0, kHfRatioScale},
      {ProxyId::Tenengrad, 1.0, 0.0, kTenengradScale},
      {ProxyId::LaplacianVariance, 1.0, 0.0, kLaplacianScale},
  }};
}

void ProxySpec::validate() const {
  require(!terms.empty(), ErrorKind::InvalidParameter, "proxy list is empty");
  bool any_positive = false;
  for (const auto& t : terms) {
    require(std::isfinite(t.weight) && t.weight >= 0.0, ErrorKind::InvalidParameter,
            "proxy weights must be finite and non-negative");
    require(std::isfinite(t.offset) && std::isfinite(t.scale) && t.scale > 0.0,
            ErrorKind::InvalidParameter, "proxy normalization must be finite with scale > 0");
    any_positive = any_positive || t.weight > 0.0;
  }
  require(any_positive, ErrorKind::InvalidParameter, "at least one proxy weight must be positive");
}

double raw_proxy(const Image& img, ProxyId id) { return dispatch(img, id, nullptr); }

double raw_proxy_with_gradient(const Image& img, ProxyId id, Image& grad) {
  return dispatch(img, id, &grad);
}

double perceptual_proxy_score(const Image& img, const ProxySpec& spec) {
  spec.validate();
  return proxy_score(clamped(img), spec, nullptr);
}

double perceptual_loss(const Image& img, const ProxySpec& spec) {
  return -perceptual_proxy_score(img, spec);
}

double recon_loss(const Image& fused, const Image& original) {
  require(fused.same_shape(original), ErrorKind::InvalidParameter, "recon_loss: shape mismatch");
  double sum = 0.0;
  for (Index c = 0; c < fused.channels(); ++c) sum += (fused[c] - original[c]).square().sum();
  return sum / static_cast<double>(fused.pixel_count() * fused.channels());
}

void check_lambda(double lambda) {
  require(std::isfinite(lambda) && lambda >= 0.0 && lambda <= 1.0, ErrorKind::InvalidParameter,
          "lambda must lie in [0,1], got " + std::to_string(lambda));
}

LossReport composite_loss(const Image& fused, const Image& original, double lambda,
                          const ProxySpec& spec) {
  check_lambda(lambda);
  LossReport r;
  r.lambda = lambda;
  r.recon = recon_loss(fused, original);
  r.percep = perceptual_loss(fused, spec);
  r.composite = (1.0 - lambda) * r.recon + lambda * r.percep;
  return r;
}

FusionObjective::FusionObjective(std::span<const Image> images, const BasisBank& bank,
                                 double lambda, ProxySpec spec)
    : lambda_(lambda), spec_(std::move(spec)) {
  check_lambda(lambda);
  spec_.validate();
  require(!images.empty(), ErrorKind::InvalidParameter, "objective needs at least one image");
  for (const auto& img : images) {
    require(img.same_shape(images[0]), ErrorKind::InvalidParameter,
            "objective: source images differ in shape");
  }
  require(bank.height() == images[0].height() && bank.width() == images[0].width(),
          ErrorKind::InvalidParameter, "objective: basis bank size does not match images");
  original_ = images[0];
  spectra_.reserve(images.size());
  for (const auto& img : images) spectra_.push_back(forward_spectrum(img));
  classes_ = radial_classes(images[0].height(), images[0].width());
  class_basis_ = bank.class_values(classes_);
  hf_select_ = high_frequency_selector(original_.height(), original_.width());
}

Eigen::MatrixXd FusionObjective::class_masks(const Coefficients& coeffs) const {
  require(coeffs.sources() == sources() && coeffs.bands() == bands(), ErrorKind::InvalidParameter,
          "coefficients are " + std::to_string(coeffs.sources()) + "x" +
              std::to_string(coeffs.bands()) + ", objective expects " + std::to_string(sources()) +
              "x" + std::to_string(bands()));
  Eigen::MatrixXd m = coeffs.values() * class_basis_.transpose();
  softmax_columns(m);
  return m;
}

Image FusionObjective::fuse(const Eigen::MatrixXd& masks, std::vector<ComplexPlane>* spectra) const {
  const Index h = original_.height();
  const Index w = original_.width();
  const Index n_src = sources();
  Image out(h, w, original_.channels());
  ComplexPlane z(h, w);
  if (spectra) spectra->clear();
  for (Index c = 0; c < original_.channels(); ++c) {
    const auto* cls = classes_.class_of_bin.data();
    for (Index k = 0; k < h * w; ++k) {
      const Index u = cls[k];
      std::complex<double> acc = 0.0;
      for (Index i = 0; i < n_src; ++i) acc += masks(i, u) * spectra_[i][c](k);
      z(k) = acc;
    }
    out[c] = fft::inverse(z).real();
    if (spectra) spectra->push_back(z);
  }
  return out;
}

Image FusionObjective::fused(const Coefficients& coeffs) const { return fuse(class_masks(coeffs)); }

double FusionObjective::score(const Image& fused_img, const std::vector<ComplexPlane>& spectra,
                              Image* grad, std::vector<ComplexPlane>* grad_hat) const {
  // With nothing clipped the clamped image is the fused image, whose spectra are
  // already at hand; the energy ratio and its gradient then need no transforms.
  bool unclipped = true;
  for (const auto& p : fused_img.planes()) unclipped = unclipped && ((p >= 0.0) && (p <= 1.0)).all();
  const Image x = unclipped ? fused_img : clamped(fused_img);
  const Index channels = x.channels();
  double total = 0.0;
  if (grad) *grad = Image(x.height(), x.width(), channels);
  if (grad_hat) grad_hat->clear();
  Image term_grad;
  std::vector<ComplexPlane> term_hat;
  for (const auto& t : spec_.terms) {
    if (t.weight == 0.0) continue;
    const double k = t.weight / t.scale;
    double raw = 0.0;
    if (t.id == ProxyId::HighFrequencyRatio && unclipped) {
      raw = hf_ratio_spectral(spectra, hf_select_, grad_hat ? &term_hat : nullptr);
      if (grad_hat) {
        if (grad_hat->empty()) {
          for (const auto& y : term_hat) grad_hat->push_back(k * y);
        } else {
          for (Index c = 0; c < channels; ++c) (*grad_hat)[c] += k * term_hat[c];
        }
      }
    } else {
      raw = dispatch(x, t.id, grad ? &term_grad : nullptr);
      if (grad) {
        for (Index c = 0; c < channels; ++c) (*grad)[c] += k * term_grad[c];
      }
    }
    total += t.weight * (raw - t.offset) / t.scale;
  }
  return total;
}

LossReport FusionObjective::evaluate(const Coefficients& coeffs, CoeffGradient* grad) const {
  const Eigen::MatrixXd masks = class_masks(coeffs);
  std::vector<ComplexPlane> fused_hat;
  const Image fused_img = fuse(masks, &fused_hat);
  const Index channels = original_.channels();
  const double n = static_cast<double>(original_.pixel_count() * channels);
  const bool want_percep_grad = grad && lambda_ > 0.0;

  LossReport r;
  r.lambda = lambda_;
  r.recon = recon_loss(fused_img, original_);
  Image percep_grad;
  std::vector<ComplexPlane> percep_grad_hat;
  // At lambda = 0 the perceptual term is still reported but carries no weight.
  r.percep = -score(fused_img, fused_hat, want_percep_grad ? &percep_grad : nullptr,
                    want_percep_grad ? &percep_grad_hat : nullptr);
  r.composite = (1.0 - lambda_) * r.recon + lambda_ * r.percep;
  if (!grad) return r;

  // dL/dI in the spatial domain, then carried into the frequency domain by the
  // adjoint of the unitary inverse transform (the forward transform). Terms that
  // were differentiated in the frequency domain are added there.
  const Index h = original_.height();
  const Index w = original_.width();
  const Index n_src = sources();
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n_src, classes_.size());
  ComplexPlane g_hat;
  for (Index c = 0; c < channels; ++c) {
    Plane g = ((1.0 - lambda_) * 2.0 / n) * (fused_img[c] - original_[c]);
    if (want_percep_grad) {
      // Clamp passes gradients inside [0,1] and blocks them outside.
      const Plane inside = (fused_img[c] >= 0.0 && fused_img[c] <= 1.0).cast<double>();
      g -= lambda_ * percep_grad[c] * inside;
    }
    fft::transform(g.cast<std::complex<double>>(), g_hat, fft::Direction::Forward);
    if (!percep_grad_hat.empty()) g_hat -= lambda_ * percep_grad_hat[c];
    const auto* cls = classes_.class_of_bin.data();
    for (Index k = 0; k < h * w; ++k) {
      const std::complex<double> gk = g_hat(k);
      double* a = adj.col(cls[k]).data();
      for (Index i = 0; i < n_src; ++i) {
        const std::complex<double> xk = spectra_[i][c](k);
        a[i] += gk.real() * xk.real() + gk.imag() * xk.imag();
      }
    }
  }
  // Softmax Jacobian per radial class: dS_j = M_j (A_j - sum_i M_i A_i).
  const Eigen::RowVectorXd weighted = (masks.array() * adj.array()).colwise().sum();
  const Eigen::MatrixXd d_scores =
      (masks.array() * (adj.rowwise() - weighted).array()).matrix();
  grad->g = d_scores * class_basis_;
  return r;
}

CoeffGradient loss_gradient_wrt_coeffs(std::span<const Image> images, const Coefficients& coeffs,
                                       const BasisBank& bank, double lambda,
                                       const ProxySpec& spec) {
  FusionObjective objective(images, bank, lambda, spec);
  CoeffGradient g;
  objective.evaluate(coeffs, &g);
  return g;
}

}  // namespace freqmix
