#pragma once

// Independent reference implementations used only by tests. Nothing here calls
// into the FFT path or the radial-class machinery of the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "freqmix/image.hpp"
#include "freqmix/objective.hpp"
#include "freqmix/spectral.hpp"

namespace oracle {

using freqmix::ComplexPlane;
using freqmix::Image;
using freqmix::Index;
using freqmix::Plane;

/// Direct O((HW)^2) unitary DFT. sign = -1 forward, +1 inverse.
inline ComplexPlane dft(const ComplexPlane& x, int sign) {
  const Index h = x.rows();
  const Index w = x.cols();
  ComplexPlane out(h, w);
  const double norm = 1.0 / std::sqrt(static_cast<double>(h * w));
  for (Index u = 0; u < h; ++u) {
    for (Index v = 0; v < w; ++v) {
      std::complex<double> acc = 0.0;
      for (Index r = 0; r < h; ++r) {
        for (Index c = 0; c < w; ++c) {
          const double phase = sign * 2.0 * std::numbers::pi *
                               (static_cast<double>(u * r) / h + static_cast<double>(v * c) / w);
          acc += x(r, c) * std::polar(1.0, phase);
        }
      }
      out(u, v) = acc * norm;
    }
  }
  return out;
}

inline ComplexPlane dft(const Plane& x, int sign) { return dft(ComplexPlane(x.cast<std::complex<double>>()), sign); }

/// Masks evaluated bin by bin straight from the defining formulas.
inline std::vector<Plane> masks(const Eigen::MatrixXd& c, Index h, Index w, Index bands) {
  const double d_max = std::sqrt(static_cast<double>(h * h + w * w)) / 2.0;
  std::vector<Plane> out(static_cast<std::size_t>(c.rows()), Plane(h, w));
  for (Index r = 0; r < h; ++r) {
    const double fh = r <= h / 2 ? r : r - h;
    for (Index q = 0; q < w; ++q) {
      const double fw = q <= w / 2 ? q : q - w;
      const double d = std::sqrt(fh * fh + fw * fw);
      std::vector<double> s(static_cast<std::size_t>(c.rows()), 0.0);
      for (Index b = 0; b < bands; ++b) {
        const double t = static_cast<double>(b) / (bands - 1);
        const double mu = d_max * t * t;
        const double sigma = (0.05 + 0.5 * t * t) * d_max;
        const double rb = std::exp(-(d - mu) * (d - mu) / (2 * sigma * sigma));
        for (Index i = 0; i < c.rows(); ++i) s[i] += c(i, b) * rb;
      }
      double peak = s[0];
      for (double v : s) peak = std::max(peak, v);
      double total = 0.0;
      for (double& v : s) total += (v = std::exp(v - peak));
      for (Index i = 0; i < c.rows(); ++i) out[i](r, q) = s[i] / total;
    }
  }
  return out;
}

/// Fusion through the direct DFT; returns real part and (via `imag_max`) the
/// largest imaginary residual.
inline Image fusion(const std::vector<Image>& images, const std::vector<Plane>& m,
                    double* imag_max = nullptr) {
  const Index h = images[0].height();
  const Index w = images[0].width();
  Image out(h, w, images[0].channels());
  double worst = 0.0;
  for (Index ch = 0; ch < images[0].channels(); ++ch) {
    ComplexPlane z = ComplexPlane::Zero(h, w);
    for (std::size_t i = 0; i < images.size(); ++i) {
      z += m[i].cast<std::complex<double>>() * dft(images[i][ch], -1);
    }
    const ComplexPlane back = dft(z, +1);
    out[ch] = back.real();
    worst = std::max(worst, back.imag().abs().maxCoeff());
  }
  if (imag_max) *imag_max = worst;
  return out;
}

/// 3x3 correlation with replicated borders, written out pixel by pixel.
inline Plane correlate(const Plane& x, const double (&k)[3][3]) {
  const Index h = x.rows();
  const Index w = x.cols();
  Plane out(h, w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int a = -1; a <= 1; ++a) {
        for (int b = -1; b <= 1; ++b) {
          const Index rr = std::min<Index>(std::max<Index>(r + a, 0), h - 1);
          const Index cc = std::min<Index>(std::max<Index>(c + b, 0), w - 1);
          acc += k[a + 1][b + 1] * x(rr, cc);
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

inline double tenengrad(const Image& img) {
  const double sx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  const double sy[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  double total = 0.0;
  for (const auto& p : img.planes()) {
    const Plane gx = correlate(p, sx);
    const Plane gy = correlate(p, sy);
    for (Index k = 0; k < p.size(); ++k) total += gx(k) * gx(k) + gy(k) * gy(k);
  }
  return total / static_cast<double>(img.pixel_count() * img.channels());
}

inline double mse(const Image& a, const Image& b) {
  double s = 0.0;
  for (Index c = 0; c < a.channels(); ++c) {
    for (Index k = 0; k < a[c].size(); ++k) s += (a[c](k) - b[c](k)) * (a[c](k) - b[c](k));
  }
  return s / static_cast<double>(a.pixel_count() * a.channels());
}

inline double psnr(const Image& a, const Image& b) { return 10.0 * std::log10(1.0 / mse(a, b)); }

/// SSIM with a full 2-D 11x11 Gaussian window evaluated at every valid position.
inline double ssim(const Image& a, const Image& b) {
  constexpr int n = 11;
  double win[n][n];
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      win[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      total += win[i][j];
    }
  }
  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double acc_channels = 0.0;
  for (Index ch = 0; ch < a.channels(); ++ch) {
    double acc = 0.0;
    int count = 0;
    for (Index r = 0; r + n <= a.height(); ++r) {
      for (Index c = 0; c + n <= a.width(); ++c) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            const double wgt = win[i][j] / total;
            const double x = a[ch](r + i, c + j);
            const double y = b[ch](r + i, c + j);
            ma += wgt * x;
            mb += wgt * y;
            saa += wgt * x * x;
            sbb += wgt * y * y;
            sab += wgt * x * y;
          }
        }
        const double va = saa - ma * ma;
        const double vb = sbb - mb * mb;
        const double cov = sab - ma * mb;
        acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    }
    acc_channels += acc / count;
  }
  return acc_channels / a.channels();
}

/// Central finite differences of f over every entry of c.
template <typename F>
Eigen::MatrixXd finite_difference(F&& f, const Eigen::MatrixXd& c, double step) {
  Eigen::MatrixXd g(c.rows(), c.cols());
  for (Index i = 0; i < c.rows(); ++i) {
    for (Index b = 0; b < c.cols(); ++b) {
      Eigen::MatrixXd cp = c;
      Eigen::MatrixXd cm = c;
      cp(i, b) += step;
      cm(i, b) -= step;
      g(i, b) = (f(cp) - f(cm)) / (2.0 * step);
    }
  }
  return g;
}

struct GradientCheck {
  double max_relative = 0.0;  // over entries with magnitude >= floor
  double max_absolute_small = 0.0;  // over entries below floor
};

/// Compares analytic and numeric gradients: relative error where either
/// magnitude reaches `floor`, absolute error elsewhere.
inline GradientCheck compare_gradients(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric,
                                       double floor = 1e-8) {
  GradientCheck out;
  for (Index k = 0; k < analytic.size(); ++k) {
    const double a = analytic(k);
    const double n = numeric(k);
    const double scale = std::max(std::abs(a), std::abs(n));
    if (scale < floor) {
      out.max_absolute_small = std::max(out.max_absolute_small, std::abs(a - n));
    } else {
      out.max_relative = std::max(out.max_relative, std::abs(a - n) / scale);
    }
  }
  return out;
}

inline Image random_image(std::mt19937_64& rng, Index h, Index w, Index channels, double lo = 0.0,
                          double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Image img(h, w, channels);
  for (auto& p : img.planes()) p = p.unaryExpr([&](double) { return u(rng); });
  return img;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Eigen::MatrixXd::NullaryExpr(rows, cols, [&]() { return u(rng); });
}

}  // namespace oracle
