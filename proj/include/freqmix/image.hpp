#pragma once

#include <Eigen/Core>

#include <complex>
#include <vector>

#include "freqmix/error.hpp"

namespace freqmix {

using Index = Eigen::Index;

template <typename Scalar>
using PlaneT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Plane = PlaneT<double>;
using ComplexPlane = PlaneT<std::complex<double>>;

/// A stack of equally sized H×W planes, one per channel. `Image` holds real
/// intensities, `Spectrum` holds unitary DFT coefficients in unshifted order.
template <typename Scalar>
class ChannelStack {
 public:
  using PlaneType = PlaneT<Scalar>;

  ChannelStack() = default;

  ChannelStack(Index height, Index width, Index channels) {
    check_dims(height, width, channels);
    planes_.assign(static_cast<std::size_t>(channels), PlaneType::Zero(height, width));
  }

  explicit ChannelStack(std::vector<PlaneType> planes) : planes_(std::move(planes)) {
    require(!planes_.empty(), ErrorKind::InvalidDimension, "image needs at least one channel");
    check_dims(planes_[0].rows(), planes_[0].cols(), static_cast<Index>(planes_.size()));
    for (const auto& p : planes_) {
      require(p.rows() == height() && p.cols() == width(), ErrorKind::InvalidDimension,
              "channel planes differ in size");
    }
  }

  static ChannelStack constant(Index height, Index width, Index channels, Scalar value) {
    ChannelStack out(height, width, channels);
    for (auto& p : out.planes_) p.setConstant(value);
    return out;
  }

  Index height() const { return planes_.empty() ? 0 : planes_[0].rows(); }
  Index width() const { return planes_.empty() ? 0 : planes_[0].cols(); }
  Index channels() const { return static_cast<Index>(planes_.size()); }
  Index pixel_count() const { return height() * width(); }
  bool empty() const { return planes_.empty(); }

  PlaneType& operator[](Index c) { return planes_[static_cast<std::size_t>(c)]; }
  const PlaneType& operator[](Index c) const { return planes_[static_cast<std::size_t>(c)]; }

  std::vector<PlaneType>& planes() { return planes_; }
  const std::vector<PlaneType>& planes() const { return planes_; }

  bool same_shape(const ChannelStack& other) const {
    return height() == other.height() && width() == other.width() &&
           channels() == other.channels();
  }

  ChannelStack& operator+=(const ChannelStack& other) {
    require(same_shape(other), ErrorKind::InvalidParameter, "shape mismatch in +=");
    for (Index c = 0; c < channels(); ++c) (*this)[c] += other[c];
    return *this;
  }

  ChannelStack& operator*=(Scalar s) {
    for (auto& p : planes_) p *= s;
    return *this;
  }

 private:
  static void check_dims(Index h, Index w, Index c) {
    require(h >= 2 && w >= 2, ErrorKind::InvalidDimension,
            "image dimensions must be at least 2x2, got " + std::to_string(h) + "x" +
                std::to_string(w));
    require(c == 1 || c == 3, ErrorKind::InvalidDimension,
            "channel count must be 1 or 3, got " + std::to_string(c));
  }

  std::vector<PlaneType> planes_;
};

using Image = ChannelStack<double>;
using Spectrum = ChannelStack<std::complex<double>>;

template <typename Scalar>
ChannelStack<Scalar> operator+(ChannelStack<Scalar> a, const ChannelStack<Scalar>& b) {
  a += b;
  return a;
}

template <typename Scalar>
ChannelStack<Scalar> operator*(Scalar s, ChannelStack<Scalar> a) {
  a *= s;
  return a;
}

/// Copy with every value clamped to [0,1].
Image clamped(const Image& img);

/// Largest absolute element-wise difference. Shapes must match.
double max_abs_diff(const Image& a, const Image& b);

bool all_finite(const Image& img);

}  // namespace freqmix
