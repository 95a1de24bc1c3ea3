#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "freqmix/objective.hpp"
#include "freqmix/spectral.hpp"

namespace freqmix {

struct OptimizerConfig {
  int steps = 300;
  double step_size = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-15;  // losses are per-pixel means, gradients can be ~1e-12
  double init_bias = 2.0;  // added to row 0 so the start favors the original
  std::uint64_t seed = 0;
  // Stop once the composite loss improves by less than this over 10 steps; 0 disables.
  double convergence_tol = 0.0;

  void validate() const;
};

struct OptimizationTrace {
  std::vector<LossReport> losses;  // one per step, evaluated before the update
  Coefficients coefficients;       // best coefficients seen
  LossReport final_report;         // loss at `coefficients`
  int steps_run = 0;
  double wall_seconds = 0.0;
};

/// Initial point: zeros with init_bias on row 0. The seed is recorded for
/// reproducibility; the initialization itself is deterministic.
Coefficients initial_coefficients(Index sources, Index bands, const OptimizerConfig& cfg);

/// Adaptive-moment descent on the composite loss with respect to the coefficients.
OptimizationTrace optimize_coefficients(const Image& original, std::span<const Image> variants,
                                        const BasisBank& bank, double lambda,
                                        const OptimizerConfig& cfg,
                                        const ProxySpec& spec = ProxySpec::defaults());

/// Same, over a prebuilt objective.
OptimizationTrace optimize_coefficients(const FusionObjective& objective,
                                        const OptimizerConfig& cfg);

struct SweepResult {
  double lambda = 0.0;
  LossReport report;
  Coefficients coefficients;
};

/// One independent optimization per lambda, results ordered by lambda.
/// `workers` bounds concurrency; results do not depend on it.
std::vector<SweepResult> lambda_sweep(const Image& original, std::span<const Image> variants,
                                      const BasisBank& bank, std::span<const double> lambdas,
                                      const OptimizerConfig& cfg,
                                      const ProxySpec& spec = ProxySpec::defaults(),
                                      int workers = 1);

}  // namespace freqmix
