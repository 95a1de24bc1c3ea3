#include "freqmix/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace freqmix::fft {
namespace {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// FFTW's planner is not re-entrant; execution of an existing plan on new arrays is.
// ESTIMATE planning without SIMD alignment assumptions keeps results independent of
// buffer addresses, so repeated runs are bit-identical.
fftw_plan plan_for(Index rows, Index cols, Direction dir) {
  static std::mutex mutex;
  static std::map<std::tuple<Index, Index, int>, PlanPtr> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(rows, cols, dir == Direction::Forward ? 0 : 1);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second.get();
  ComplexPlane a(rows, cols), b(rows, cols);
  fftw_plan p = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                                 reinterpret_cast<fftw_complex*>(a.data()),
                                 reinterpret_cast<fftw_complex*>(b.data()),
                                 dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  require(p != nullptr, ErrorKind::InvalidDimension, "FFTW could not plan transform");
  cache.emplace(key, PlanPtr(p));
  return p;
}

}  // namespace

void transform(const ComplexPlane& in, ComplexPlane& out, Direction dir) {
  out.resize(in.rows(), in.cols());
  fftw_plan p = plan_for(in.rows(), in.cols(), dir);
  // FFTW never writes to the input of an out-of-place complex transform.
  auto* src = const_cast<std::complex<double>*>(in.data());
  if (src == out.data()) {
    ComplexPlane tmp = in;
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(tmp.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
  } else {
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(src),
                     reinterpret_cast<fftw_complex*>(out.data()));
  }
  out *= 1.0 / std::sqrt(static_cast<double>(in.size()));
}

ComplexPlane forward(const Plane& in) {
  ComplexPlane out;
  transform(in.cast<std::complex<double>>(), out, Direction::Forward);
  return out;
}

ComplexPlane forward(const ComplexPlane& in) {
  ComplexPlane out;
  transform(in, out, Direction::Forward);
  return out;
}

ComplexPlane inverse(const ComplexPlane& in) {
  ComplexPlane out;
  transform(in, out, Direction::Inverse);
  return out;
}

}  // namespace freqmix::fft
