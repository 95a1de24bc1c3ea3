#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "freqmix/optimizer.hpp"
#include "freqmix/variants.hpp"

namespace freqmix::io {

namespace fs = std::filesystem;

constexpr int kManifestVersion = 1;
constexpr double kDefaultLambda = 0.3;
constexpr Index kDefaultBands = 25;

/// Everything one enhancement run needs. Exactly one of `variant_paths`
/// (externally produced variants) and `variant_config` (generated) is set.
///
/// Text layout: a `freqmix-manifest 1` line followed by `key = value` lines.
/// Keys: original, variants (comma-separated), enhancer, scales, unsharp_radius,
/// unsharp_amount, lambda, bands, steps, step_size, beta1, beta2, epsilon,
/// init_bias, seed, convergence_tol, out_dir. Relative paths resolve against the
/// manifest's directory.
struct RunManifest {
  fs::path original;
  std::optional<std::vector<fs::path>> variant_paths;
  std::optional<VariantConfig> variant_config = VariantConfig{};
  double lambda = kDefaultLambda;
  Index bands = kDefaultBands;
  OptimizerConfig optimizer;
  fs::path out_dir = "freqmix-out";

  /// Checks every constraint, including that referenced input files exist.
  /// Throws ErrorKind::Manifest.
  void validate() const;
};

RunManifest parse_manifest(const std::string& text, const fs::path& base_dir = {});
RunManifest load_manifest(const fs::path& path);
std::string format_manifest(const RunManifest& m);

/// A list of originals sharing one set of run settings. Layout: a
/// `freqmix-corpus 1` line, one `image = <path>` line per original, plus any
/// RunManifest key other than original/variants.
struct CorpusManifest {
  std::vector<fs::path> images;
  RunManifest settings;
};

CorpusManifest parse_corpus(const std::string& text, const fs::path& base_dir = {});
CorpusManifest load_corpus(const fs::path& path);

}  // namespace freqmix::io
