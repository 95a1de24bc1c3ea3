#include "freqmix/variants.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>

namespace freqmix {
namespace {

// Resample along one axis of every plane. `along_rows` resamples the vertical axis.
Plane resample_axis(const Plane& in, Index out_len, bool along_rows) {
  const Index in_len = along_rows ? in.rows() : in.cols();
  const Index other = along_rows ? in.cols() : in.rows();
  Plane out = along_rows ? Plane(out_len, other) : Plane(other, out_len);
  const double ratio = static_cast<double>(in_len) / static_cast<double>(out_len);
  for (Index o = 0; o < out_len; ++o) {
    const double src = (static_cast<double>(o) + 0.5) * ratio - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    const auto ib = static_cast<Index>(base);
    std::array<double, 4> wts{};
    std::array<Index, 4> idx{};
    for (int j = 0; j < 4; ++j) {
      wts[j] = catmull_rom(t - static_cast<double>(j - 1));
      const Index s = ib + j - 1;
      idx[j] = s < 0 ? 0 : (s >= in_len ? in_len - 1 : s);
    }
    for (Index q = 0; q < other; ++q) {
      double acc = 0.0;
      for (int j = 0; j < 4; ++j) acc += wts[j] * (along_rows ? in(idx[j], q) : in(q, idx[j]));
      if (along_rows) {
        out(o, q) = acc;
      } else {
        out(q, o) = acc;
      }
    }
  }
  return out;
}

Eigen::VectorXd gaussian_kernel(double sigma) {
  const auto radius = static_cast<Index>(std::ceil(3.0 * sigma));
  Eigen::VectorXd k(2 * radius + 1);
  for (Index i = -radius; i <= radius; ++i) {
    const auto x = static_cast<double>(i);
    k(i + radius) = std::exp(-(x * x) / (2.0 * sigma * sigma));
  }
  return k / k.sum();
}

Plane convolve_axis(const Plane& in, const Eigen::VectorXd& k, bool along_rows) {
  const Index radius = (k.size() - 1) / 2;
  const Index h = in.rows();
  const Index w = in.cols();
  Plane out = Plane::Zero(h, w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      double acc = 0.0;
      for (Index j = -radius; j <= radius; ++j) {
        if (along_rows) {
          const Index rr = std::clamp<Index>(r + j, 0, h - 1);
          acc += k(j + radius) * in(rr, c);
        } else {
          const Index cc = std::clamp<Index>(c + j, 0, w - 1);
          acc += k(j + radius) * in(r, cc);
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace

std::string to_string(Enhancer e) {
  switch (e) {
    case Enhancer::Unsharp: return "unsharp";
    case Enhancer::None: return "none";
    case Enhancer::External: return "external";
  }
  return "unknown";
}

Enhancer enhancer_from_string(const std::string& name) {
  if (name == "unsharp") return Enhancer::Unsharp;
  if (name == "none") return Enhancer::None;
  if (name == "external") return Enhancer::External;
  fail(ErrorKind::InvalidParameter, "unknown enhancer '" + name + "'");
}

void VariantConfig::validate() const {
  require(!scales.empty(), ErrorKind::InvalidParameter, "variant scale list is empty");
  for (int s : scales) {
    require(s >= 1, ErrorKind::InvalidParameter, "variant scales must be >= 1");
  }
  require(std::isfinite(unsharp_radius) && unsharp_radius > 0.0, ErrorKind::InvalidParameter,
          "unsharp radius must be finite and > 0");
  require(std::isfinite(unsharp_amount) && unsharp_amount >= 0.0, ErrorKind::InvalidParameter,
          "unsharp amount must be finite and >= 0");
}

double catmull_rom(double x) {
  constexpr double a = -0.5;
  const double t = std::abs(x);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

Image resample_bicubic(const Image& img, Index out_height, Index out_width) {
  require(out_height >= 2 && out_width >= 2, ErrorKind::InvalidParameter,
          "resample target must be at least 2x2");
  std::vector<Plane> planes;
  for (const auto& p : img.planes()) {
    Plane rows = resample_axis(p, out_height, true);
    planes.push_back(resample_axis(rows, out_width, false).max(0.0).min(1.0));
  }
  return Image(std::move(planes));
}

Image gaussian_blur(const Image& img, double sigma) {
  require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::InvalidParameter,
          "blur sigma must be finite and > 0");
  const Eigen::VectorXd k = gaussian_kernel(sigma);
  std::vector<Plane> planes;
  for (const auto& p : img.planes()) planes.push_back(convolve_axis(convolve_axis(p, k, true), k, false));
  return Image(std::move(planes));
}

Image unsharp_mask(const Image& img, double radius, double amount) {
  require(std::isfinite(amount) && amount >= 0.0, ErrorKind::InvalidParameter,
          "unsharp amount must be finite and >= 0");
  const Image blurred = gaussian_blur(img, radius);
  std::vector<Plane> planes;
  for (Index c = 0; c < img.channels(); ++c) {
    planes.push_back((img[c] + amount * (img[c] - blurred[c])).max(0.0).min(1.0));
  }
  return Image(std::move(planes));
}

std::vector<Image> make_variant_set(const Image& original, const VariantConfig& cfg) {
  cfg.validate();
  require(cfg.enhancer != Enhancer::External, ErrorKind::InvalidParameter,
          "external variants must be supplied as files");
  const Index h = original.height();
  const Index w = original.width();
  std::vector<std::future<Image>> jobs;
  for (int s : cfg.scales) {
    jobs.push_back(std::async(std::launch::async, [&original, &cfg, h, w, s] {
      Image up = resample_bicubic(original, h * s, w * s);
      if (cfg.enhancer == Enhancer::Unsharp) {
        up = unsharp_mask(up, cfg.unsharp_radius, cfg.unsharp_amount);
      }
      return resample_bicubic(up, h, w);
    }));
  }
  std::vector<Image> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace freqmix
