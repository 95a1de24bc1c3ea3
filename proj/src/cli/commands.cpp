#include "freqmix/cli/commands.hpp"

#include "json.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "freqmix/io/coefficient_file.hpp"
#include "freqmix/io/fs_util.hpp"
#include "freqmix/io/png_io.hpp"
#include "freqmix/objective.hpp"
#include "freqmix/parallel.hpp"
#include "freqmix/variants.hpp"

namespace freqmix::cli {
namespace {

using nlohmann::json;

// Re-throws module errors with the failing pipeline stage prefixed.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DivergenceError& e) {
    throw DivergenceError(e.step(), "stage '" + name + "': " + e.what());
  } catch (const DecodeError& e) {
    throw DecodeError(e.offset(), "stage '" + name + "': " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(e.field(), "stage '" + name + "': " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), "stage '" + name + "': " + e.what());
  }
}

std::optional<double> maybe_ssim(const Image& a, const Image& b) {
  if (a.height() < kSsimWindow || a.width() < kSsimWindow) return std::nullopt;
  return ssim(a, b);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt_optional(const std::optional<double>& v) { return v ? io::format_double(*v) : "NA"; }

std::vector<Image> all_sources(const LoadedInputs& in) {
  std::vector<Image> all;
  all.reserve(in.variants.size() + 1);
  all.push_back(in.original);
  all.insert(all.end(), in.variants.begin(), in.variants.end());
  return all;
}

BasisBank bank_for(const Image& img, Index bands) {
  return make_basis_bank(frequency_distance_grid(img.height(), img.width()), bands);
}

io::CoefficientFile coefficient_file(const Coefficients& c, double lambda, const Image& img) {
  return io::CoefficientFile{c, lambda, img.height(), img.width()};
}

}  // namespace

LoadedInputs load_inputs(const io::RunManifest& manifest) {
  stage("manifest", [&] { manifest.validate(); });
  LoadedInputs in;
  in.original = stage("read original", [&] { return io::read_image(manifest.original, &in.bit_depth); });
  if (manifest.variant_paths) {
    for (const auto& p : *manifest.variant_paths) {
      Image v = stage("read variant", [&] { return io::read_image(p); });
      if (!v.same_shape(in.original)) {
        fail(ErrorKind::Manifest, "stage 'read variant': '" + p.string() +
                                      "' does not match the original's size or channel count");
      }
      in.variants.push_back(std::move(v));
    }
  } else {
    in.variants = stage("variants", [&] { return make_variant_set(in.original, *manifest.variant_config); });
  }
  return in;
}

EnhanceOutcome enhance(const LoadedInputs& inputs, const io::RunManifest& manifest) {
  const std::vector<Image> sources = all_sources(inputs);
  const BasisBank bank = stage("basis", [&] { return bank_for(inputs.original, manifest.bands); });
  EnhanceOutcome out;
  out.trace = stage("optimize", [&] {
    FusionObjective objective(sources, bank, manifest.lambda, ProxySpec::defaults());
    return optimize_coefficients(objective, manifest.optimizer);
  });
  stage("fuse", [&] {
    out.masks = compose_masks(out.trace.coefficients, bank);
    out.fused = frequency_mixup(sources, out.masks);
  });
  stage("metrics", [&] {
    const Image shown = clamped(out.fused);
    out.psnr_to_original = psnr(shown, inputs.original);
    out.ssim_to_original = maybe_ssim(shown, inputs.original);
    out.proxy_score = perceptual_proxy_score(out.fused, ProxySpec::defaults());
  });
  return out;
}

std::string summary_json(const EnhanceOutcome& outcome, const io::RunManifest& manifest,
                         const LoadedInputs& inputs) {
  const auto& r = outcome.trace.final_report;
  json j;
  j["format"] = "freqmix-summary";
  j["version"] = 1;
  j["lambda"] = manifest.lambda;
  j["recon"] = r.recon;
  j["percep"] = r.percep;
  j["composite"] = r.composite;
  j["proxy_score"] = outcome.proxy_score;
  j["psnr_to_original"] = outcome.psnr_to_original;
  j["ssim_to_original"] = optional_number(outcome.ssim_to_original);
  j["sources"] = static_cast<long long>(outcome.trace.coefficients.sources());
  j["bands"] = static_cast<long long>(manifest.bands);
  j["steps_run"] = outcome.trace.steps_run;
  j["seed"] = manifest.optimizer.seed;
  j["height"] = static_cast<long long>(inputs.original.height());
  j["width"] = static_cast<long long>(inputs.original.width());
  j["channels"] = static_cast<long long>(inputs.original.channels());
  return j.dump(2) + "\n";
}

std::string trace_tsv(const OptimizationTrace& trace) {
  std::ostringstream out;
  out << "step\tcomposite\trecon\tpercep\n";
  for (std::size_t i = 0; i < trace.losses.size(); ++i) {
    const auto& r = trace.losses[i];
    out << i << '\t' << io::format_double(r.composite) << '\t' << io::format_double(r.recon) << '\t'
        << io::format_double(r.percep) << '\n';
  }
  return out.str();
}

void write_enhance_artifacts(const EnhanceOutcome& outcome, const io::RunManifest& manifest,
                             const LoadedInputs& inputs, const fs::path& out_dir) {
  stage("write", [&] {
    io::StagingDir staging(out_dir);
    io::write_image(outcome.fused, staging.file("enhanced.png"), inputs.bit_depth);
    io::save_coefficients(coefficient_file(outcome.trace.coefficients, manifest.lambda, inputs.original),
                          staging.file("coefficients.txt"));
    for (Index i = 0; i < outcome.masks.sources(); ++i) {
      const auto& m = outcome.masks.masks[static_cast<std::size_t>(i)];
      const std::string stem = "mask_" + std::to_string(i);
      io::write_file_atomic(staging.file(stem + "_raw.png"), io::encode_plane_png(m));
      io::write_file_atomic(staging.file(stem + "_centered.png"), io::encode_plane_png(centered(m)));
    }
    io::write_file_atomic(staging.file("trace.tsv"), trace_tsv(outcome.trace));
    io::write_file_atomic(staging.file("summary.json"), summary_json(outcome, manifest, inputs));
    staging.commit();
  });
}

EnhanceOutcome cmd_enhance(const io::RunManifest& manifest) {
  const LoadedInputs inputs = load_inputs(manifest);
  EnhanceOutcome out = enhance(inputs, manifest);
  write_enhance_artifacts(out, manifest, inputs, manifest.out_dir);
  return out;
}

DecomposeOutcome cmd_decompose(const io::RunManifest& manifest, const fs::path& coefficient_path) {
  const LoadedInputs inputs = load_inputs(manifest);
  const io::CoefficientFile file = stage("read coefficients", [&] { return io::load_coefficients(coefficient_path); });
  const auto n_sources = static_cast<Index>(inputs.variants.size() + 1);
  if (file.coefficients.sources() != n_sources || file.coefficients.bands() != manifest.bands) {
    fail(ErrorKind::Schema, "stage 'read coefficients': file is " +
                                std::to_string(file.coefficients.sources()) + "x" +
                                std::to_string(file.coefficients.bands()) + " but the manifest needs " +
                                std::to_string(n_sources) + "x" + std::to_string(manifest.bands));
  }
  if ((file.height != 0 || file.width != 0) &&
      (file.height != inputs.original.height() || file.width != inputs.original.width())) {
    fail(ErrorKind::Schema, "stage 'read coefficients': file was produced for a " +
                                std::to_string(file.height) + "x" + std::to_string(file.width) + " image");
  }
  const std::vector<Image> sources = all_sources(inputs);
  DecomposeOutcome out;
  stage("decompose", [&] {
    const BasisBank bank = bank_for(inputs.original, manifest.bands);
    const MaskSet masks = compose_masks(file.coefficients, bank);
    out.fused = frequency_mixup(sources, masks);
    out.components = decompose_contributions(sources, masks);
    Image sum = out.components[0];
    for (std::size_t i = 1; i < out.components.size(); ++i) sum += out.components[i];
    out.max_resum_error = max_abs_diff(sum, out.fused);
    out.verified = out.max_resum_error <= kResumTolerance;
  });
  stage("write", [&] {
    io::StagingDir staging(manifest.out_dir);
    for (std::size_t i = 0; i < out.components.size(); ++i) {
      io::write_image(out.components[i], staging.file("component_" + std::to_string(i) + ".png"),
                      inputs.bit_depth);
    }
    std::ostringstream v;
    v << "resum_max_abs_error " << io::format_double(out.max_resum_error) << '\n'
      << "tolerance " << io::format_double(kResumTolerance) << '\n'
      << "verified " << (out.verified ? "yes" : "no") << '\n';
    io::write_file_atomic(staging.file("decompose.txt"), v.str());
    staging.commit();
  });
  return out;
}

std::vector<SweepRow> cmd_sweep(const io::RunManifest& manifest, std::span<const double> lambdas,
                                int workers) {
  if (lambdas.empty()) fail(ErrorKind::Usage, "sweep needs at least one lambda");
  for (double l : lambdas) {
    if (!(std::isfinite(l) && l >= 0.0 && l <= 1.0)) fail(ErrorKind::Usage, "sweep lambdas must lie in [0,1]");
  }
  const LoadedInputs inputs = load_inputs(manifest);
  const std::vector<Image> sources = all_sources(inputs);
  const BasisBank bank = bank_for(inputs.original, manifest.bands);
  const auto results = stage("optimize", [&] {
    return lambda_sweep(inputs.original, std::span(inputs.variants), bank, lambdas, manifest.optimizer,
                        ProxySpec::defaults(), workers);
  });
  std::vector<SweepRow> rows;
  io::StagingDir staging(manifest.out_dir);
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& res = results[k];
    SweepRow row;
    row.lambda = res.lambda;
    row.report = res.report;
    const Image fused = stage("fuse", [&] { return frequency_mixup(sources, compose_masks(res.coefficients, bank)); });
    const Image shown = clamped(fused);
    row.psnr = psnr(shown, inputs.original);
    row.ssim = maybe_ssim(shown, inputs.original);
    row.proxy_score = perceptual_proxy_score(fused, ProxySpec::defaults());
    const std::string tag = "sweep_" + std::to_string(k) + "_lambda_" + io::format_double(res.lambda);
    row.enhanced_path = manifest.out_dir / (tag + ".png");
    row.coefficient_path = manifest.out_dir / (tag + "_coefficients.txt");
    stage("write", [&] {
      io::write_image(fused, staging.file(row.enhanced_path.filename().string()), inputs.bit_depth);
      io::save_coefficients(coefficient_file(res.coefficients, res.lambda, inputs.original),
                            staging.file(row.coefficient_path.filename().string()));
    });
    rows.push_back(std::move(row));
  }
  stage("write", [&] {
    io::write_file_atomic(staging.file("sweep_report.tsv"), sweep_report_tsv(rows));
    staging.commit();
  });
  return rows;
}

std::string sweep_report_tsv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "lambda\trecon\tpercep\tcomposite\tproxy_score\tpsnr\tssim\tenhanced_path\tcoefficient_path\n";
  for (const auto& r : rows) {
    out << io::format_double(r.lambda) << '\t' << io::format_double(r.report.recon) << '\t'
        << io::format_double(r.report.percep) << '\t' << io::format_double(r.report.composite) << '\t'
        << io::format_double(r.proxy_score) << '\t' << io::format_double(r.psnr) << '\t'
        << fmt_optional(r.ssim) << '\t' << r.enhanced_path.string() << '\t'
        << r.coefficient_path.string() << '\n';
  }
  return out.str();
}

std::vector<fs::path> cmd_gen_variants(const io::RunManifest& manifest) {
  if (!manifest.variant_config) fail(ErrorKind::Usage, "gen-variants needs generated-variant settings");
  const LoadedInputs inputs = load_inputs(manifest);
  std::vector<fs::path> written;
  stage("write", [&] {
    io::StagingDir staging(manifest.out_dir);
    for (std::size_t i = 0; i < inputs.variants.size(); ++i) {
      const std::string name = "variant_" + std::to_string(i + 1) + ".png";
      io::write_image(inputs.variants[i], staging.file(name), inputs.bit_depth);
      written.push_back(manifest.out_dir / name);
    }
    staging.commit();
  });
  return written;
}

std::vector<std::vector<double>> sample_lambdas(const LambdaSampling& sampling, std::size_t images) {
  std::vector<std::vector<double>> out(images);
  if (!sampling.fixed.empty()) {
    for (double l : sampling.fixed) {
      if (!(std::isfinite(l) && l >= 0.0 && l <= 1.0)) fail(ErrorKind::Usage, "lambdas must lie in [0,1]");
    }
    for (auto& v : out) v = sampling.fixed;
    return out;
  }
  if (sampling.uniform_count < 1) fail(ErrorKind::Usage, "need a lambda list or a positive uniform count");
  std::mt19937_64 rng(sampling.seed);
  for (auto& v : out) {
    for (int k = 0; k < sampling.uniform_count; ++k) {
      // 53 random bits mapped to [0,1]; spelled out so draws do not depend on the
      // standard library's distribution implementation.
      v.push_back(static_cast<double>(rng() >> 11) / static_cast<double>((1ULL << 53) - 1));
    }
  }
  return out;
}

std::string record_json(const DatasetRecord& r) {
  json j;
  j["original_path"] = r.original_path.string();
  j["lambda"] = r.lambda;
  if (!r.ok()) {
    j["error"] = r.error;
  } else {
    j["enhanced_path"] = r.enhanced_path.string();
    j["coefficient_path"] = r.coefficient_path.string();
    j["checksums"] = {{"original", r.original_crc}, {"enhanced", r.enhanced_crc}, {"coefficients", r.coefficient_crc}};
  }
  return j.dump();
}

std::vector<DatasetRecord> read_index(const fs::path& index_path) {
  std::istringstream in(io::read_text(index_path));
  std::string line;
  std::vector<DatasetRecord> out;
  bool header = false;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("index", "index line is not JSON: " + std::string(e.what()));
    }
    if (!header) {
      if (j.value("format", "") != "freqmix-index") throw ParseError("format", "not a freqmix index");
      header = true;
      continue;
    }
    DatasetRecord r;
    r.original_path = j.at("original_path").get<std::string>();
    r.lambda = j.at("lambda").get<double>();
    if (j.contains("error")) {
      r.error = j["error"].get<std::string>();
    } else {
      r.enhanced_path = j.at("enhanced_path").get<std::string>();
      r.coefficient_path = j.at("coefficient_path").get<std::string>();
      r.original_crc = j.at("checksums").at("original").get<std::string>();
      r.enhanced_crc = j.at("checksums").at("enhanced").get<std::string>();
      r.coefficient_crc = j.at("checksums").at("coefficients").get<std::string>();
    }
    out.push_back(std::move(r));
  }
  return out;
}

ExportOutcome cmd_export_dataset(const io::CorpusManifest& corpus, const LambdaSampling& sampling,
                                 int workers) {
  const auto lambdas = sample_lambdas(sampling, corpus.images.size());
  {
    // Validate shared settings before any compute; per-image problems are recorded instead.
    io::RunManifest probe = corpus.settings;
    if (probe.variant_paths) fail(ErrorKind::Manifest, "manifest: corpus exports generate their own variants");
    if (!(std::isfinite(probe.lambda) && probe.lambda >= 0.0 && probe.lambda <= 1.0)) {
      fail(ErrorKind::Manifest, "manifest: lambda must lie in [0,1]");
    }
    probe.variant_config->validate();
    probe.optimizer.validate();
    if (probe.bands < 2) fail(ErrorKind::Manifest, "manifest: bands must be >= 2");
  }
  const fs::path root = corpus.settings.out_dir;
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) fail(ErrorKind::Io, "cannot create '" + root.string() + "'");

  std::vector<std::vector<DatasetRecord>> per_image(corpus.images.size());
  parallel_for(corpus.images.size(), workers, [&](std::size_t idx) {
    const fs::path& original = corpus.images[idx];
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%04zu_", idx);
    const fs::path image_dir = root / (prefix + original.stem().string());
    std::optional<LoadedInputs> inputs;
    std::string load_error;
    try {
      io::RunManifest m = corpus.settings;
      m.original = original;
      inputs = load_inputs(m);
    } catch (const std::exception& e) {
      load_error = e.what();
    }
    for (std::size_t k = 0; k < lambdas[idx].size(); ++k) {
      DatasetRecord rec;
      rec.original_path = original;
      rec.lambda = lambdas[idx][k];
      if (!inputs) {
        rec.error = load_error;
        per_image[idx].push_back(std::move(rec));
        continue;
      }
      try {
        io::RunManifest m = corpus.settings;
        m.original = original;
        m.lambda = rec.lambda;
        m.out_dir = image_dir / ("lambda_" + std::to_string(k));
        const EnhanceOutcome out = enhance(*inputs, m);
        write_enhance_artifacts(out, m, *inputs, m.out_dir);
        rec.enhanced_path = m.out_dir / "enhanced.png";
        rec.coefficient_path = m.out_dir / "coefficients.txt";
        rec.original_crc = io::crc32_hex(original);
        rec.enhanced_crc = io::crc32_hex(rec.enhanced_path);
        rec.coefficient_crc = io::crc32_hex(rec.coefficient_path);
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      per_image[idx].push_back(std::move(rec));
    }
  });

  ExportOutcome outcome;
  std::ostringstream index;
  index << json{{"format", "freqmix-index"}, {"version", 1}}.dump() << '\n';
  for (auto& recs : per_image) {
    for (auto& r : recs) {
      index << record_json(r) << '\n';
      outcome.records.push_back(std::move(r));
    }
  }
  outcome.index_path = root / "index.jsonl";
  io::write_file_atomic(outcome.index_path, index.str());
  return outcome;
}

std::string cmd_stats(const fs::path& image, const std::optional<fs::path>& reference, Index bands) {
  const Image img = stage("read image", [&] { return io::read_image(image); });
  const Image shown = clamped(img);
  std::ostringstream out;
  out << "image\t" << image.string() << '\n';
  out << "size\t" << img.height() << 'x' << img.width() << 'x' << img.channels() << '\n';
  for (ProxyId id : {ProxyId::HighFrequencyRatio, ProxyId::Tenengrad, ProxyId::LaplacianVariance}) {
    out << to_string(id) << '\t' << io::format_double(raw_proxy(shown, id)) << '\n';
  }
  out << "proxy_score\t" << io::format_double(perceptual_proxy_score(img, ProxySpec::defaults())) << '\n';
  const BasisBank bank = bank_for(img, bands);
  const BandEnergyProfile profile = band_energy_profile(img, bank);
  for (Index b = 0; b < profile.size(); ++b) {
    out << "band_energy_" << b << '\t' << io::format_double(profile.energies(b)) << '\n';
  }
  if (reference) {
    const Image ref = stage("read reference", [&] { return io::read_image(*reference); });
    if (!ref.same_shape(img)) fail(ErrorKind::Usage, "reference image differs in shape");
    out << "psnr\t" << io::format_double(psnr(img, ref)) << '\n';
    out << "ssim\t" << fmt_optional(maybe_ssim(img, ref)) << '\n';
  }
  return out.str();
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::Manifest:
    case ErrorKind::InvalidParameter:
    case ErrorKind::InvalidDimension:
      return 2;
    case ErrorKind::Io:
    case ErrorKind::Decode:
    case ErrorKind::Parse:
    case ErrorKind::Schema:
      return 3;
    case ErrorKind::Divergence:
    case ErrorKind::SymmetryViolation:
      return 4;
  }
  return 1;
}

}  // namespace freqmix::cli
