#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "freqmix/io/manifest.hpp"
#include "freqmix/metrics.hpp"
#include "freqmix/optimizer.hpp"
#include "freqmix/spectral.hpp"

namespace freqmix::cli {

namespace fs = std::filesystem;

struct LoadedInputs {
  Image original;
  int bit_depth = 8;
  std::vector<Image> variants;
};

/// Validates the manifest, then reads the original and reads or generates variants.
LoadedInputs load_inputs(const io::RunManifest& manifest);

struct EnhanceOutcome {
  OptimizationTrace trace;
  Image fused;  // unclamped
  MaskSet masks;
  double psnr_to_original = 0.0;
  std::optional<double> ssim_to_original;  // absent below the SSIM window size
  double proxy_score = 0.0;
};

/// Pure computation: optimize coefficients and fuse.
EnhanceOutcome enhance(const LoadedInputs& inputs, const io::RunManifest& manifest);

std::string summary_json(const EnhanceOutcome& outcome, const io::RunManifest& manifest,
                         const LoadedInputs& inputs);
std::string trace_tsv(const OptimizationTrace& trace);

/// Writes enhanced.png, coefficients.txt, mask_<i>_{raw,centered}.png, trace.tsv and
/// summary.json into `out_dir`. Either all files appear or none do.
void write_enhance_artifacts(const EnhanceOutcome& outcome, const io::RunManifest& manifest,
                             const LoadedInputs& inputs, const fs::path& out_dir);

EnhanceOutcome cmd_enhance(const io::RunManifest& manifest);

struct DecomposeOutcome {
  std::vector<Image> components;
  Image fused;
  double max_resum_error = 0.0;
  bool verified = false;
};

constexpr double kResumTolerance = 1e-6;

/// Writes component_<i>.png and decompose.txt (with the re-summation check) into out_dir.
DecomposeOutcome cmd_decompose(const io::RunManifest& manifest, const fs::path& coefficient_path);

struct SweepRow {
  double lambda = 0.0;
  LossReport report;
  double proxy_score = 0.0;
  double psnr = 0.0;
  std::optional<double> ssim;
  fs::path enhanced_path;
  fs::path coefficient_path;
};

std::vector<SweepRow> cmd_sweep(const io::RunManifest& manifest, std::span<const double> lambdas,
                                int workers);
std::string sweep_report_tsv(std::span<const SweepRow> rows);

/// Writes variant_<i>.png for the manifest's variant settings.
std::vector<fs::path> cmd_gen_variants(const io::RunManifest& manifest);

struct LambdaSampling {
  std::vector<double> fixed;  // used when non-empty
  int uniform_count = 0;      // else: this many uniform draws in [0,1] per image
  std::uint64_t seed = 0;
};

/// Lambdas for each corpus image, in input order. Deterministic in the seed.
std::vector<std::vector<double>> sample_lambdas(const LambdaSampling& sampling, std::size_t images);

struct DatasetRecord {
  fs::path original_path;
  fs::path enhanced_path;
  fs::path coefficient_path;
  double lambda = 0.0;
  std::string original_crc;
  std::string enhanced_crc;
  std::string coefficient_crc;
  std::string error;  // non-empty for failed entries

  bool ok() const { return error.empty(); }
};

struct ExportOutcome {
  std::vector<DatasetRecord> records;
  fs::path index_path;
};

/// Runs enhancement for every (image, lambda) pair and writes index.jsonl.
/// Failures are recorded in the index and do not stop the export.
ExportOutcome cmd_export_dataset(const io::CorpusManifest& corpus, const LambdaSampling& sampling,
                                 int workers);

std::string record_json(const DatasetRecord& record);
std::vector<DatasetRecord> read_index(const fs::path& index_path);

/// Proxy scores and band energies of an image, plus PSNR/SSIM against a reference.
std::string cmd_stats(const fs::path& image, const std::optional<fs::path>& reference, Index bands);

/// Process exit code for an error kind: 2 usage/manifest, 3 I/O, 4 divergence.
int exit_code_for(ErrorKind kind);

}  // namespace freqmix::cli
