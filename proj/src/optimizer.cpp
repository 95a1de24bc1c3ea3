#include "freqmix/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numeric>

#include "freqmix/parallel.hpp"

namespace freqmix {

void OptimizerConfig::validate() const {
  require(steps >= 1, ErrorKind::InvalidParameter, "optimizer needs at least one step");
  require(std::isfinite(step_size) && step_size > 0.0, ErrorKind::InvalidParameter,
          "step size must be finite and > 0");
  require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0, ErrorKind::InvalidParameter,
          "momentum constants must lie in (0,1)");
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorKind::InvalidParameter,
          "epsilon must be finite and > 0");
  require(std::isfinite(init_bias), ErrorKind::InvalidParameter, "init bias must be finite");
  require(std::isfinite(convergence_tol) && convergence_tol >= 0.0, ErrorKind::InvalidParameter,
          "convergence tolerance must be finite and >= 0");
}

Coefficients initial_coefficients(Index sources, Index bands, const OptimizerConfig& cfg) {
  Coefficients c(sources, bands);
  c.values().row(0).setConstant(cfg.init_bias);
  return c;
}

OptimizationTrace optimize_coefficients(const FusionObjective& objective,
                                        const OptimizerConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  OptimizationTrace trace;
  Coefficients c = initial_coefficients(objective.sources(), objective.bands(), cfg);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(c.sources(), c.bands());
  Eigen::MatrixXd v = m;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;

  Coefficients best = c;
  LossReport best_report;
  best_report.composite = std::numeric_limits<double>::infinity();
  CoeffGradient grad;

  auto check = [](const LossReport& r, int step) {
    if (!std::isfinite(r.composite) || !std::isfinite(r.recon) || !std::isfinite(r.percep)) {
      throw DivergenceError(step, "non-finite loss at optimizer step " + std::to_string(step));
    }
  };

  for (int step = 0; step < cfg.steps; ++step) {
    const LossReport r = objective.evaluate(c, &grad);
    check(r, step);
    if (!grad.g.allFinite()) {
      throw DivergenceError(step, "non-finite gradient at optimizer step " + std::to_string(step));
    }
    trace.losses.push_back(r);
    if (r.composite < best_report.composite) {
      best_report = r;
      best = c;
    }
    trace.steps_run = step + 1;
    if (cfg.convergence_tol > 0.0 && step >= 10 &&
        trace.losses[step - 10].composite - r.composite < cfg.convergence_tol) {
      break;
    }
    beta1_pow *= cfg.beta1;
    beta2_pow *= cfg.beta2;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad.g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.g.cwiseAbs2();
    const Eigen::ArrayXXd m_hat = m.array() / (1.0 - beta1_pow);
    const Eigen::ArrayXXd v_hat = v.array() / (1.0 - beta2_pow);
    c.values().array() -= cfg.step_size * m_hat / (v_hat.sqrt() + cfg.epsilon);
  }
  // The last update has not been scored yet.
  if (trace.steps_run == cfg.steps) {
    const LossReport r = objective.evaluate(c);
    check(r, cfg.steps);
    if (r.composite < best_report.composite) {
      best_report = r;
      best = c;
    }
  }
  trace.coefficients = std::move(best);
  trace.final_report = best_report;
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

namespace {

std::vector<Image> with_original(const Image& original, std::span<const Image> variants) {
  require(!variants.empty(), ErrorKind::InvalidParameter, "at least one variant is required");
  std::vector<Image> all;
  all.reserve(variants.size() + 1);
  all.push_back(original);
  all.insert(all.end(), variants.begin(), variants.end());
  return all;
}

}  // namespace

OptimizationTrace optimize_coefficients(const Image& original, std::span<const Image> variants,
                                        const BasisBank& bank, double lambda,
                                        const OptimizerConfig& cfg, const ProxySpec& spec) {
  const std::vector<Image> all = with_original(original, variants);
  return optimize_coefficients(FusionObjective(all, bank, lambda, spec), cfg);
}

std::vector<SweepResult> lambda_sweep(const Image& original, std::span<const Image> variants,
                                      const BasisBank& bank, std::span<const double> lambdas,
                                      const OptimizerConfig& cfg, const ProxySpec& spec,
                                      int workers) {
  require(!lambdas.empty(), ErrorKind::InvalidParameter, "lambda list is empty");
  for (double l : lambdas) check_lambda(l);
  cfg.validate();
  const std::vector<Image> all = with_original(original, variants);

  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lambdas[a] < lambdas[b]; });

  std::vector<SweepResult> results(lambdas.size());
  parallel_for(order.size(), workers, [&](std::size_t slot) {
    const double lambda = lambdas[order[slot]];
    const OptimizationTrace t = optimize_coefficients(FusionObjective(all, bank, lambda, spec), cfg);
    results[slot] = SweepResult{lambda, t.final_report, t.coefficients};
  });
  return results;
}

}  // namespace freqmix
