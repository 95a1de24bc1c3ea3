#include <filesystem>
#include <random>

#include "doctest.h"
#include "freqmix/io/coefficient_file.hpp"
#include "freqmix/metrics.hpp"
#include "freqmix/optimizer.hpp"
#include "freqmix/variants.hpp"
#include "oracles.hpp"
#include "test_data.hpp"

using namespace freqmix;

namespace {

struct Fixture {
  Image original;
  std::vector<Image> variants;
  BasisBank bank;
};

Fixture small_fixture(int k) {
  Fixture f;
  f.original = resample_bicubic(test_data::corpus_image(k), 32, 32);
  f.variants = make_variant_set(f.original, VariantConfig{});
  f.bank = make_basis_bank(frequency_distance_grid(32, 32), 25);
  return f;
}

std::vector<Image> with_original(const Fixture& f) {
  std::vector<Image> all{f.original};
  all.insert(all.end(), f.variants.begin(), f.variants.end());
  return all;
}

}  // namespace

TEST_CASE("OptimizerConfig validation") {
  OptimizerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.steps = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = OptimizerConfig{};
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = OptimizerConfig{};
  cfg.step_size = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = OptimizerConfig{};
  cfg.convergence_tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("initial coefficients favor the original") {
  const Coefficients c = initial_coefficients(4, 25, OptimizerConfig{});
  CHECK((c.values().row(0).array() == 2.0).all());
  CHECK((c.values().bottomRows(3).array() == 0.0).all());
}

TEST_CASE("lambda 0 recovers the original") {
  const Fixture f = small_fixture(0);
  const OptimizationTrace t = optimize_coefficients(f.original, f.variants, f.bank, 0.0, OptimizerConfig{});
  CHECK(t.steps_run == 300);
  CHECK(t.losses.size() == 300);
  const FusionObjective obj(with_original(f), f.bank, 0.0, ProxySpec::defaults());
  CHECK(psnr(obj.fused(t.coefficients), f.original) >= 60.0);
  CHECK(t.final_report.composite <= t.losses.front().composite);
}

TEST_CASE("identical variants leave the coefficients untouched") {
  const Fixture f = small_fixture(1);
  const std::vector<Image> same(3, f.original);
  OptimizerConfig cfg;
  cfg.steps = 20;
  const OptimizationTrace t = optimize_coefficients(f.original, same, f.bank, 0.0, cfg);
  CHECK(t.losses.front().composite < 1e-30);
  CHECK(t.coefficients == initial_coefficients(4, 25, cfg));
}

TEST_CASE("lambda 1 is at least as sharp as lambda 0") {
  const Fixture f = small_fixture(2);
  const auto all = with_original(f);
  OptimizerConfig cfg;
  cfg.steps = 150;
  const auto score = [&](double lambda) {
    const OptimizationTrace t = optimize_coefficients(f.original, f.variants, f.bank, lambda, cfg);
    return perceptual_proxy_score(FusionObjective(all, f.bank, lambda, ProxySpec::defaults()).fused(t.coefficients),
                                  ProxySpec::defaults());
  };
  CHECK(score(1.0) >= score(0.0));
}

TEST_CASE("descent over 25-step windows") {
  const Fixture f = small_fixture(4);
  for (double lambda : {0.0, 0.3, 0.9}) {
    CAPTURE(lambda);
    const OptimizationTrace t = optimize_coefficients(f.original, f.variants, f.bank, lambda, OptimizerConfig{});
    for (std::size_t k = 25; k < t.losses.size(); ++k) {
      CHECK(t.losses[k].composite <= t.losses[k - 25].composite + 1e-6);
    }
    for (const auto& r : t.losses) CHECK(std::isfinite(r.composite));
  }
}

TEST_CASE("early stopping") {
  const Fixture f = small_fixture(5);
  OptimizerConfig cfg;
  cfg.convergence_tol = 1.0;  // any 10-step window qualifies
  const OptimizationTrace t = optimize_coefficients(f.original, f.variants, f.bank, 0.3, cfg);
  CHECK(t.steps_run < 300);
  CHECK(t.losses.size() == static_cast<std::size_t>(t.steps_run));
}

TEST_CASE("divergence is reported with its step") {
  Fixture f = small_fixture(6);
  f.variants[1][0](3, 3) = std::numeric_limits<double>::quiet_NaN();
  try {
    optimize_coefficients(f.original, f.variants, f.bank, 0.3, OptimizerConfig{});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.kind() == ErrorKind::Divergence);
    CHECK(e.step() == 0);
  }
}

TEST_CASE("lambda_sweep") {
  const Fixture f = small_fixture(7);
  OptimizerConfig cfg;
  const std::vector<double> grid{0.9, 0.1, 0.5, 0.3, 0.7};
  const auto results = lambda_sweep(f.original, f.variants, f.bank, grid, cfg, ProxySpec::defaults(), 3);
  REQUIRE(results.size() == 5);
  const auto all = with_original(f);
  std::vector<double> recon, proxy;
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (k > 0) CHECK(results[k].lambda > results[k - 1].lambda);
    const Image fused = FusionObjective(all, f.bank, results[k].lambda, ProxySpec::defaults())
                            .fused(results[k].coefficients);
    recon.push_back(recon_loss(fused, f.original));
    proxy.push_back(perceptual_proxy_score(fused, ProxySpec::defaults()));
  }
  for (std::size_t k = 1; k < results.size(); ++k) {
    CAPTURE(k);
    CHECK(recon[k] >= 0.95 * recon[k - 1]);
    CHECK(proxy[k] >= proxy[k - 1] - 0.05 * std::abs(proxy[k - 1]));
  }

  SUBCASE("single lambda 0 equals a direct run") {
    const std::vector<double> zero{0.0};
    const auto one = lambda_sweep(f.original, f.variants, f.bank, zero, cfg);
    const OptimizationTrace t = optimize_coefficients(f.original, f.variants, f.bank, 0.0, cfg);
    CHECK(one[0].coefficients == t.coefficients);
  }
  SUBCASE("duplicates and worker count do not change results") {
    const std::vector<double> dup{0.3, 0.3};
    const auto a = lambda_sweep(f.original, f.variants, f.bank, dup, cfg, ProxySpec::defaults(), 1);
    const auto b = lambda_sweep(f.original, f.variants, f.bank, dup, cfg, ProxySpec::defaults(), 2);
    CHECK(a[0].coefficients == a[1].coefficients);
    CHECK(a[0].coefficients == b[0].coefficients);
    CHECK(a[0].coefficients == results[1].coefficients);
  }
  SUBCASE("invalid lambdas") {
    const std::vector<double> bad{0.2, 1.5};
    CHECK_THROWS_AS(lambda_sweep(f.original, f.variants, f.bank, bad, cfg), Error);
    CHECK_THROWS_AS(lambda_sweep(f.original, f.variants, f.bank, std::span<const double>{}, cfg), Error);
  }
}

TEST_CASE("optimization is deterministic") {
  const Fixture f = small_fixture(8);
  OptimizerConfig cfg;
  cfg.steps = 60;
  const OptimizationTrace a = optimize_coefficients(f.original, f.variants, f.bank, 0.3, cfg);
  const OptimizationTrace b = optimize_coefficients(f.original, f.variants, f.bank, 0.3, cfg);
  CHECK(a.coefficients == b.coefficients);
  REQUIRE(a.losses.size() == b.losses.size());
  for (std::size_t k = 0; k < a.losses.size(); ++k) CHECK(a.losses[k].composite == b.losses[k].composite);
}

TEST_CASE("coefficient files") {
  std::mt19937_64 rng(9);
  const auto dir = std::filesystem::temp_directory_path() / "freqmix_coeff_test";
  std::filesystem::create_directories(dir);

  SUBCASE("bit-exact round trip") {
    Eigen::MatrixXd m = oracle::random_matrix(rng, 4, 25, 10.0);
    m(0, 0) = 1e-300;
    m(1, 1) = -0.1;
    m(2, 2) = 1.0 / 3.0;
    const auto path = dir / "c.txt";
    io::save_coefficients(io::CoefficientFile{Coefficients(m), 0.3, 128, 96}, path);
    const io::CoefficientFile back = io::load_coefficients(path);
    CHECK(back.coefficients == Coefficients(m));
    CHECK(back.lambda == 0.3);
    CHECK(back.height == 128);
    CHECK(back.width == 96);
  }
  SUBCASE("column count mismatch is a schema error") {
    std::string text = "freqmix-coefficients 1\nsources 2\nbands 25\nlambda 0.3\nheight 8\nwidth 8\ndata\n";
    for (int r = 0; r < 2; ++r) {
      for (int b = 0; b < 24; ++b) text += b ? " 0" : "0";
      text += "\n";
    }
    try {
      io::parse_coefficients(text);
      FAIL("expected schema error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Schema);
    }
  }
  SUBCASE("malformed header names the field") {
    const std::string text = "freqmix-coefficients 1\nsources two\nbands 2\nlambda 0\nheight 8\nwidth 8\ndata\n0 0\n0 0\n";
    try {
      io::parse_coefficients(text);
      FAIL("expected parse error");
    } catch (const ParseError& e) {
      CHECK(e.field() == "sources");
      CHECK(e.kind() == ErrorKind::Parse);
    }
  }
  SUBCASE("external all-zero file composes to uniform masks") {
    std::string text = "# written by hand\nfreqmix-coefficients 1\nsources 4\nbands 25\nlambda 0.3\nheight 16\nwidth 16\ndata\n";
    for (int r = 0; r < 4; ++r) {
      for (int b = 0; b < 25; ++b) text += b ? " 0" : "0";
      text += "\n";
    }
    const io::CoefficientFile file = io::parse_coefficients(text);
    const MaskSet m = compose_masks(file.coefficients, make_basis_bank(frequency_distance_grid(16, 16), 25));
    for (const auto& p : m.masks) CHECK((p - 0.25).abs().maxCoeff() < 1e-15);
  }
  std::filesystem::remove_all(dir);
}
