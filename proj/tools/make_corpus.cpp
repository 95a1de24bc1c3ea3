// Regenerates the bundled 128x128 test corpus under data/corpus.
//
//   make_corpus <out-dir> [count] [size]

#include <cmath>
#include <cstdint>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "freqmix/io/fs_util.hpp"
#include "freqmix/io/png_io.hpp"
#include "freqmix/variants.hpp"

namespace {

using namespace freqmix;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(gen_() >> 11) / static_cast<double>(1ULL << 53);
  }

 private:
  std::mt19937_64 gen_;
};

Image synthesize(int index, Index size) {
  Rng rng(0x5eed0000ULL + static_cast<std::uint64_t>(index));
  Image img(size, size, 3);
  const double n = static_cast<double>(size);

  // Smooth color gradient base.
  for (Index c = 0; c < 3; ++c) {
    const double a = rng.uniform(0.25, 0.6);
    const double gx = rng.uniform(-0.25, 0.25);
    const double gy = rng.uniform(-0.25, 0.25);
    for (Index r = 0; r < size; ++r) {
      for (Index q = 0; q < size; ++q) img[c](r, q) = a + gx * (q / n - 0.5) + gy * (r / n - 0.5);
    }
  }
  // Oriented gratings, amplitude falling with frequency.
  const int gratings = 3 + index % 4;
  for (int k = 0; k < gratings; ++k) {
    const double freq = rng.uniform(2.0, 28.0);
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double amp = 0.12 / std::sqrt(freq / 2.0);
    const double tint[3] = {rng.uniform(0.5, 1.0), rng.uniform(0.5, 1.0), rng.uniform(0.5, 1.0)};
    for (Index r = 0; r < size; ++r) {
      for (Index q = 0; q < size; ++q) {
        const double t = (std::cos(theta) * q + std::sin(theta) * r) / n;
        const double v = amp * std::sin(2.0 * std::numbers::pi * freq * t + phase);
        for (Index c = 0; c < 3; ++c) img[c](r, q) += tint[c] * v;
      }
    }
  }
  // Hard-edged shapes.
  const int shapes = 2 + (index * 7) % 5;
  for (int k = 0; k < shapes; ++k) {
    const double cx = rng.uniform(0.1, 0.9) * n;
    const double cy = rng.uniform(0.1, 0.9) * n;
    const double rad = rng.uniform(0.06, 0.22) * n;
    const bool disk = rng.uniform(0.0, 1.0) < 0.5;
    const double col[3] = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
    const double alpha = rng.uniform(0.4, 0.8);
    for (Index r = 0; r < size; ++r) {
      for (Index q = 0; q < size; ++q) {
        const double dx = q - cx;
        const double dy = r - cy;
        const bool in = disk ? dx * dx + dy * dy < rad * rad : std::abs(dx) < rad && std::abs(dy) < 0.6 * rad;
        if (!in) continue;
        for (Index c = 0; c < 3; ++c) img[c](r, q) = (1.0 - alpha) * img[c](r, q) + alpha * col[c];
      }
    }
  }
  // Fine grain.
  const double grain = 0.01 + 0.01 * (index % 3);
  for (Index r = 0; r < size; ++r) {
    for (Index q = 0; q < size; ++q) {
      const double v = rng.uniform(-grain, grain);
      for (Index c = 0; c < 3; ++c) img[c](r, q) += v;
    }
  }
  // Ground truths in practice are slightly soft.
  img = gaussian_blur(img, 0.7 + 0.1 * (index % 3));
  for (auto& p : img.planes()) p = 0.05 + 0.9 * p.max(0.0).min(1.0);
  return img;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_corpus <out-dir> [count] [size]\n";
    return 2;
  }
  const std::filesystem::path out = argv[1];
  const int count = argc > 2 ? std::stoi(argv[2]) : 10;
  const Index size = argc > 3 ? std::stoi(argv[3]) : 128;
  std::filesystem::create_directories(out);
  std::ostringstream corpus;
  corpus << "freqmix-corpus 1\n";
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%02d.png", i);
    io::write_image(synthesize(i, size), out / name, 8);
    corpus << "image = " << name << '\n';
  }
  io::write_file_atomic(out / "corpus.txt", corpus.str());
  std::cout << "wrote " << count << " images to " << out.string() << '\n';
  return 0;
}
