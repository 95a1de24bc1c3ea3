#include <random>

#include "doctest.h"
#include "freqmix/fft.hpp"
#include "freqmix/objective.hpp"
#include "oracles.hpp"

using namespace freqmix;

namespace {

Image checkerboard(Index n) {
  Image img(n, n, 1);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) img[0](r, c) = (r + c) % 2 ? 1.0 : 0.0;
  }
  return img;
}

Image textured(Index n) {
  Image img(n, n, 3);
  for (Index ch = 0; ch < 3; ++ch) {
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < n; ++c) {
        img[ch](r, c) = 0.5 + 0.2 * std::sin(1.3 * r + 0.4 * ch) * std::cos(0.9 * c) + 0.1 * ((r * 7 + c * 3) % 5 == 0);
      }
    }
  }
  return img;
}

Image box_blur(const Image& img) {
  const double k[3][3] = {{1 / 9.0, 1 / 9.0, 1 / 9.0}, {1 / 9.0, 1 / 9.0, 1 / 9.0}, {1 / 9.0, 1 / 9.0, 1 / 9.0}};
  Image out = img;
  for (Index c = 0; c < img.channels(); ++c) out[c] = oracle::correlate(img[c], k);
  return out;
}

// Per-bin reference gradient of the recon-only loss, assembled without radial classes.
Eigen::MatrixXd recon_gradient_oracle(const std::vector<Image>& images, const Eigen::MatrixXd& c, Index bands) {
  const Index h = images[0].height();
  const Index w = images[0].width();
  const auto m = oracle::masks(c, h, w, bands);
  const Image fused = oracle::fusion(images, m);
  const BasisBank bank = make_basis_bank(frequency_distance_grid(h, w), bands);
  const double n = static_cast<double>(h * w * images[0].channels());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(c.rows(), c.cols());
  for (Index ch = 0; ch < images[0].channels(); ++ch) {
    const ComplexPlane g_hat = oracle::dft(Plane(2.0 / n * (fused[ch] - images[0][ch])), -1);
    std::vector<ComplexPlane> x;
    for (const auto& img : images) x.push_back(oracle::dft(img[ch], -1));
    for (Index r = 0; r < h; ++r) {
      for (Index q = 0; q < w; ++q) {
        Eigen::VectorXd a(c.rows());
        for (Index i = 0; i < c.rows(); ++i) a(i) = std::real(std::conj(g_hat(r, q)) * x[i](r, q));
        double mean = 0.0;
        for (Index i = 0; i < c.rows(); ++i) mean += m[i](r, q) * a(i);
        for (Index i = 0; i < c.rows(); ++i) {
          const double ds = m[i](r, q) * (a(i) - mean);
          for (Index b = 0; b < bands; ++b) g(i, b) += ds * bank.masks[b](r, q);
        }
      }
    }
  }
  return g;
}

}  // namespace

TEST_CASE("recon_loss") {
  std::mt19937_64 rng(1);
  const Image a = oracle::random_image(rng, 4, 4, 3);
  CHECK(recon_loss(a, a) == 0.0);
  Image b = a;
  b[1](2, 3) += 0.25;
  CHECK(recon_loss(a, b) == doctest::Approx(0.0625 / 48.0).epsilon(1e-14));
  const Image c = oracle::random_image(rng, 4, 4, 3);
  CHECK(std::abs(recon_loss(a, c) - oracle::mse(a, c)) < 1e-12);
  CHECK(recon_loss(a, c) > 0.0);
  CHECK_THROWS_AS(recon_loss(a, oracle::random_image(rng, 4, 5, 3)), Error);
}

TEST_CASE("proxies on constant and checkerboard images") {
  const Image flat = Image::constant(8, 8, 1, 0.6);
  const Image board = checkerboard(8);
  for (ProxyId id : {ProxyId::HighFrequencyRatio, ProxyId::Tenengrad, ProxyId::LaplacianVariance}) {
    CAPTURE(to_string(id));
    CHECK(std::abs(raw_proxy(flat, id)) < 1e-12);
    CHECK(raw_proxy(board, id) > raw_proxy(flat, id) + 1e-3);
    CHECK(proxy_from_string(to_string(id)) == id);
  }
  CHECK(std::abs(perceptual_loss(flat, ProxySpec::defaults())) < 1e-12);
  CHECK_THROWS_AS(proxy_from_string("musiq"), Error);
  CHECK_THROWS_AS(perceptual_proxy_score(flat, ProxySpec{}), Error);
}

TEST_CASE("Tenengrad matches a direct convolution") {
  std::mt19937_64 rng(2);
  const Image img = oracle::random_image(rng, 8, 8, 1);
  CHECK(std::abs(raw_proxy(img, ProxyId::Tenengrad) - oracle::tenengrad(img)) < 1e-9);
  const Image rgb = oracle::random_image(rng, 9, 7, 3);
  CHECK(std::abs(raw_proxy(rgb, ProxyId::Tenengrad) - oracle::tenengrad(rgb)) < 1e-9);
}

TEST_CASE("proxy gradients match finite differences in pixel space") {
  std::mt19937_64 rng(3);
  const Image img = oracle::random_image(rng, 6, 7, 3);
  for (ProxyId id : {ProxyId::HighFrequencyRatio, ProxyId::Tenengrad, ProxyId::LaplacianVariance}) {
    CAPTURE(to_string(id));
    Image grad;
    const double v = raw_proxy_with_gradient(img, id, grad);
    CHECK(v == doctest::Approx(raw_proxy(img, id)).epsilon(1e-14));
    double worst = 0.0;
    for (Index c = 0; c < 3; ++c) {
      for (Index k = 0; k < img[c].size(); ++k) {
        Image p = img;
        Image m = img;
        p[c](k) += 1e-5;
        m[c](k) -= 1e-5;
        const double fd = (raw_proxy(p, id) - raw_proxy(m, id)) / 2e-5;
        worst = std::max(worst, std::abs(fd - grad[c](k)) / std::max(1e-6, std::abs(fd)));
      }
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("perceptual loss prefers the sharper image") {
  const Image img = textured(32);
  const ProxySpec spec = ProxySpec::defaults();
  CHECK(perceptual_loss(img, spec) < perceptual_loss(box_blur(img), spec));
  CHECK(perceptual_loss(img, spec) == -perceptual_proxy_score(img, spec));
}

TEST_CASE("perceptual score evaluates the clamped image") {
  Image img = textured(16);
  Image wild = img;
  wild[0](3, 3) = 4.0;
  wild[1](5, 5) = -2.0;
  Image clipped = wild;
  clipped[0](3, 3) = 1.0;
  clipped[1](5, 5) = 0.0;
  const ProxySpec spec = ProxySpec::defaults();
  CHECK(perceptual_proxy_score(wild, spec) == perceptual_proxy_score(clipped, spec));
}

TEST_CASE("composite_loss") {
  std::mt19937_64 rng(4);
  const Image fused = oracle::random_image(rng, 8, 8, 3);
  const Image orig = oracle::random_image(rng, 8, 8, 3);
  const ProxySpec spec = ProxySpec::defaults();
  const double recon = recon_loss(fused, orig);
  const double percep = perceptual_loss(fused, spec);

  CHECK(composite_loss(fused, orig, 0.0, spec).composite == recon);
  CHECK(composite_loss(fused, orig, 1.0, spec).composite == percep);
  const LossReport r = composite_loss(fused, orig, 0.3, spec);
  CHECK(r.recon == recon);
  CHECK(r.percep == percep);
  CHECK(r.lambda == 0.3);
  CHECK(std::abs(r.composite - (0.7 * oracle::mse(fused, orig) + 0.3 * percep)) < 1e-12);

  for (double bad : {-0.01, 1.01, std::nan("")}) {
    try {
      composite_loss(fused, orig, bad, spec);
      FAIL("lambda accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidParameter);
    }
  }
}

TEST_CASE("FusionObjective agrees with the direct fusion and loss") {
  std::mt19937_64 rng(5);
  const std::vector<Image> images{oracle::random_image(rng, 8, 6, 3), oracle::random_image(rng, 8, 6, 3),
                                  oracle::random_image(rng, 8, 6, 3)};
  const BasisBank bank = make_basis_bank(frequency_distance_grid(8, 6), 4);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 3, 4, 2.0);
  const FusionObjective obj(images, bank, 0.3, ProxySpec::defaults());
  const Image direct = oracle::fusion(images, oracle::masks(c, 8, 6, 4));
  CHECK(max_abs_diff(obj.fused(Coefficients(c)), direct) < 1e-10);
  const LossReport r = obj.evaluate(Coefficients(c));
  const LossReport ref = composite_loss(direct, images[0], 0.3, ProxySpec::defaults());
  CHECK(std::abs(r.composite - ref.composite) < 1e-12);
}

TEST_CASE("gradient matches central finite differences") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<Index> size(4, 16);
  std::uniform_int_distribution<Index> variants(1, 3);
  std::uniform_int_distribution<Index> bands(2, 4);
  for (int trial = 0; trial < 8; ++trial) {
    const Index h = size(rng), w = size(rng), n = variants(rng) + 1, b = bands(rng);
    std::vector<Image> images;
    for (Index i = 0; i < n; ++i) images.push_back(oracle::random_image(rng, h, w, 3, 0.2, 0.8));
    const BasisBank bank = make_basis_bank(frequency_distance_grid(h, w), b);
    const Eigen::MatrixXd c = oracle::random_matrix(rng, n, b, 1.0);
    for (double lambda : {0.0, 0.3, 1.0}) {
      CAPTURE(trial);
      CAPTURE(lambda);
      const FusionObjective obj(images, bank, lambda, ProxySpec::defaults());
      const auto f = [&](const Eigen::MatrixXd& x) { return obj.evaluate(Coefficients(x)).composite; };
      const Eigen::MatrixXd numeric = oracle::finite_difference(f, c, 1e-4);
      const Eigen::MatrixXd analytic =
          loss_gradient_wrt_coeffs(images, Coefficients(c), bank, lambda, ProxySpec::defaults()).g;
      const auto check = oracle::compare_gradients(analytic, numeric);
      CHECK(check.max_relative < 1e-5);
      CHECK(check.max_absolute_small < 1e-8);
    }
  }
}

TEST_CASE("frequency-domain gradient equals the per-bin spatial formulation") {
  std::mt19937_64 rng(7);
  for (auto [h, w] : {std::pair<Index, Index>{6, 6}, {7, 5}, {8, 3}}) {
    const std::vector<Image> images{oracle::random_image(rng, h, w, 3), oracle::random_image(rng, h, w, 3),
                                    oracle::random_image(rng, h, w, 3)};
    const Eigen::MatrixXd c = oracle::random_matrix(rng, 3, 3, 2.0);
    const BasisBank bank = make_basis_bank(frequency_distance_grid(h, w), 3);
    const Eigen::MatrixXd g = loss_gradient_wrt_coeffs(images, Coefficients(c), bank, 0.0, ProxySpec::defaults()).g;
    const Eigen::MatrixXd ref = recon_gradient_oracle(images, c, 3);
    CHECK((g - ref).cwiseAbs().maxCoeff() <= 1e-10 * ref.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("identical inputs give a zero gradient at lambda 0") {
  std::mt19937_64 rng(8);
  const Image img = oracle::random_image(rng, 8, 8, 3);
  const std::vector<Image> images(4, img);
  const BasisBank bank = make_basis_bank(frequency_distance_grid(8, 8), 5);
  const Eigen::MatrixXd g =
      loss_gradient_wrt_coeffs(images, Coefficients(oracle::random_matrix(rng, 4, 5, 3.0)), bank, 0.0,
                               ProxySpec::defaults())
          .g;
  CHECK(g.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("permutation symmetry") {
  std::mt19937_64 rng(9);
  const Image orig = oracle::random_image(rng, 8, 8, 3);
  const Image v1 = oracle::random_image(rng, 8, 8, 3);
  const Image v2 = oracle::random_image(rng, 8, 8, 3);
  const BasisBank bank = make_basis_bank(frequency_distance_grid(8, 8), 4);
  const ProxySpec spec = ProxySpec::defaults();

  SUBCASE("duplicate variants with equal rows get equal gradients") {
    const std::vector<Image> images{orig, v1, v1};
    Eigen::MatrixXd c = oracle::random_matrix(rng, 3, 4, 2.0);
    c.row(2) = c.row(1);
    const Eigen::MatrixXd g = loss_gradient_wrt_coeffs(images, Coefficients(c), bank, 0.3, spec).g;
    CHECK((g.row(1) - g.row(2)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("swapping variants with their rows") {
    const Eigen::MatrixXd c = oracle::random_matrix(rng, 3, 4, 2.0);
    Eigen::MatrixXd swapped = c;
    swapped.row(1) = c.row(2);
    swapped.row(2) = c.row(1);
    const std::vector<Image> a{orig, v1, v2};
    const std::vector<Image> b{orig, v2, v1};
    const FusionObjective oa(a, bank, 0.3, spec);
    const FusionObjective ob(b, bank, 0.3, spec);
    CHECK(max_abs_diff(oa.fused(Coefficients(c)), ob.fused(Coefficients(swapped))) < 1e-12);
    CoeffGradient ga, gb;
    const double la = oa.evaluate(Coefficients(c), &ga).composite;
    const double lb = ob.evaluate(Coefficients(swapped), &gb).composite;
    CHECK(std::abs(la - lb) < 1e-12);
    CHECK((ga.g.row(1) - gb.g.row(2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((ga.g.row(2) - gb.g.row(1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((ga.g.row(0) - gb.g.row(0)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gradient shape errors") {
  std::mt19937_64 rng(10);
  const std::vector<Image> images{oracle::random_image(rng, 8, 8, 1), oracle::random_image(rng, 8, 8, 1)};
  const BasisBank bank = make_basis_bank(frequency_distance_grid(8, 8), 3);
  CHECK_THROWS_AS(loss_gradient_wrt_coeffs(images, Coefficients(3, 3), bank, 0.3, ProxySpec::defaults()), Error);
  CHECK_THROWS_AS(loss_gradient_wrt_coeffs(images, Coefficients(2, 4), bank, 0.3, ProxySpec::defaults()), Error);
  const BasisBank other = make_basis_bank(frequency_distance_grid(8, 9), 3);
  CHECK_THROWS_AS(loss_gradient_wrt_coeffs(images, Coefficients(2, 3), other, 0.3, ProxySpec::defaults()), Error);
}
