// Command-line front end: enhance, decompose, sweep, gen-variants, export-dataset, stats.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "freqmix/cli/commands.hpp"
#include "freqmix/io/fs_util.hpp"

namespace {

using namespace freqmix;
namespace fs = std::filesystem;

struct GlobalFlags {
  std::optional<double> lambda;
  std::optional<long long> bands;
  std::optional<std::string> scales;
  std::optional<int> steps;
  std::optional<unsigned long long> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> enhancer;
  std::vector<std::string> variants;
  std::string manifest;
  std::string image;
  int jobs = 1;
};

std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<double> out;
  if (io::trim(text).empty()) return out;
  for (const auto& part : io::split(text, ',')) {
    double v = 0.0;
    if (!io::parse_double(part, v)) fail(ErrorKind::Usage, "bad lambda '" + part + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_scales(const std::string& text) {
  std::vector<int> out;
  for (const auto& part : io::split(text, ',')) {
    long long v = 0;
    if (!io::parse_int(part, v)) fail(ErrorKind::Usage, "bad scale '" + part + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// Settings shared by run manifests and corpus manifests.
void apply_overrides(const GlobalFlags& g, io::RunManifest& m) {
  if (g.lambda) m.lambda = *g.lambda;
  if (g.bands) m.bands = static_cast<Index>(*g.bands);
  if (g.steps) m.optimizer.steps = *g.steps;
  if (g.seed) m.optimizer.seed = *g.seed;
  if (g.out_dir) m.out_dir = *g.out_dir;
  if (!g.variants.empty()) {
    if (g.enhancer && *g.enhancer != "external") fail(ErrorKind::Usage, "--variants requires --enhancer external");
    m.variant_paths = std::vector<fs::path>(g.variants.begin(), g.variants.end());
    m.variant_config.reset();
  } else {
    if (g.enhancer == "external") fail(ErrorKind::Usage, "--enhancer external requires --variants");
    if (g.enhancer || g.scales) {
      if (!m.variant_config) fail(ErrorKind::Usage, "manifest uses external variants; drop --scales/--enhancer");
      if (g.enhancer) m.variant_config->enhancer = enhancer_from_string(*g.enhancer);
      if (g.scales) m.variant_config->scales = parse_scales(*g.scales);
    }
  }
}

io::RunManifest build_manifest(const GlobalFlags& g) {
  io::RunManifest m;
  if (!g.manifest.empty()) {
    m = io::load_manifest(g.manifest);
    if (!g.image.empty()) m.original = g.image;
  } else {
    if (g.image.empty()) fail(ErrorKind::Usage, "give an input image or --manifest");
    m.original = g.image;
  }
  apply_overrides(g, m);
  return m;
}

void add_global_flags(CLI::App& cmd, GlobalFlags& g) {
  cmd.add_option("--lambda", g.lambda, "Enhancement level in [0,1] (default 0.3)");
  cmd.add_option("--bands", g.bands, "Number of ring basis masks (default 25)");
  cmd.add_option("--scales", g.scales, "Comma-separated variant scale factors (default 2,3,4)");
  cmd.add_option("--steps", g.steps, "Optimizer steps (default 300)");
  cmd.add_option("--seed", g.seed, "Seed (default 0)");
  cmd.add_option("--out-dir", g.out_dir, "Output directory");
  cmd.add_option("--enhancer", g.enhancer, "Variant enhancer: unsharp, none or external");
  cmd.add_option("--variants", g.variants, "Externally produced variant PNGs")->delimiter(',');
  cmd.add_option("--manifest", g.manifest, "Run manifest file");
  cmd.add_option("--jobs", g.jobs, "Worker threads (default 1)")->check(CLI::PositiveNumber);
}

int run(int argc, char** argv) {
  CLI::App app{"Frequency-domain ground-truth enhancement"};
  app.require_subcommand(1);
  GlobalFlags g;

  auto* enhance = app.add_subcommand("enhance", "Optimize masks and write the enhanced image");
  enhance->add_option("image", g.image, "Original image (PNG)");
  add_global_flags(*enhance, g);

  std::string coefficients;
  auto* decompose = app.add_subcommand("decompose", "Write per-source frequency contributions");
  decompose->add_option("image", g.image, "Original image (PNG)");
  decompose->add_option("--coefficients", coefficients, "Coefficient file")->required();
  add_global_flags(*decompose, g);

  std::string lambda_list;
  auto* sweep = app.add_subcommand("sweep", "Optimize independently for several lambdas");
  sweep->add_option("image", g.image, "Original image (PNG)");
  sweep->add_option("--lambdas", lambda_list, "Comma-separated lambdas")->required();
  add_global_flags(*sweep, g);

  auto* gen = app.add_subcommand("gen-variants", "Write the generated variants");
  gen->add_option("image", g.image, "Original image (PNG)");
  add_global_flags(*gen, g);

  std::string corpus_path;
  std::vector<std::string> corpus_images;
  int uniform_count = 0;
  auto* exp = app.add_subcommand("export-dataset", "Write (original, enhanced) training pairs");
  exp->add_option("images", corpus_images, "Original images (instead of --corpus)");
  exp->add_option("--corpus", corpus_path, "Corpus manifest");
  exp->add_option("--lambdas", lambda_list, "Fixed comma-separated lambdas");
  exp->add_option("--uniform", uniform_count, "Uniform lambda draws per image");
  add_global_flags(*exp, g);

  std::string reference;
  auto* stats = app.add_subcommand("stats", "Proxy scores, band energies and reference metrics");
  stats->add_option("image", g.image, "Image (PNG)")->required();
  stats->add_option("--reference", reference, "Reference image for PSNR/SSIM");
  stats->add_option("--bands", g.bands, "Number of ring basis masks (default 25)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (enhance->parsed()) {
    const io::RunManifest m = build_manifest(g);
    const cli::EnhanceOutcome out = cli::cmd_enhance(m);
    std::cout << "enhanced image written to " << (m.out_dir / "enhanced.png").string() << '\n'
              << "psnr_to_original " << io::format_double(out.psnr_to_original) << '\n'
              << "steps " << out.trace.steps_run << " in " << out.trace.wall_seconds << " s\n";
  } else if (decompose->parsed()) {
    const cli::DecomposeOutcome out = cli::cmd_decompose(build_manifest(g), coefficients);
    std::cout << "components " << out.components.size() << '\n'
              << "resum_max_abs_error " << io::format_double(out.max_resum_error) << " ("
              << (out.verified ? "verified" : "FAILED") << ")\n";
    if (!out.verified) return 4;
  } else if (sweep->parsed()) {
    const auto lambdas = parse_lambdas(lambda_list);
    if (lambdas.empty()) fail(ErrorKind::Usage, "--lambdas is empty");
    const auto rows = cli::cmd_sweep(build_manifest(g), lambdas, g.jobs);
    std::cout << cli::sweep_report_tsv(rows);
  } else if (gen->parsed()) {
    for (const auto& p : cli::cmd_gen_variants(build_manifest(g))) std::cout << p.string() << '\n';
  } else if (exp->parsed()) {
    io::CorpusManifest corpus;
    if (!corpus_path.empty()) {
      corpus = io::load_corpus(corpus_path);
      corpus.images.insert(corpus.images.end(), corpus_images.begin(), corpus_images.end());
    } else {
      if (corpus_images.empty()) fail(ErrorKind::Usage, "give images or --corpus");
      corpus.images.assign(corpus_images.begin(), corpus_images.end());
    }
    if (!g.variants.empty()) fail(ErrorKind::Usage, "export-dataset generates its own variants");
    if (!g.manifest.empty()) fail(ErrorKind::Usage, "export-dataset takes --corpus, not --manifest");
    apply_overrides(g, corpus.settings);
    cli::LambdaSampling sampling;
    sampling.fixed = parse_lambdas(lambda_list);
    sampling.uniform_count = uniform_count;
    sampling.seed = corpus.settings.optimizer.seed;
    if (!sampling.fixed.empty() && uniform_count > 0) fail(ErrorKind::Usage, "use --lambdas or --uniform, not both");
    if (sampling.fixed.empty() && uniform_count <= 0) sampling.fixed = {corpus.settings.lambda};
    const auto out = cli::cmd_export_dataset(corpus, sampling, g.jobs);
    std::size_t failed = 0;
    for (const auto& r : out.records) failed += r.ok() ? 0 : 1;
    std::cout << "records " << out.records.size() << " (" << failed << " failed), index "
              << out.index_path.string() << '\n';
  } else if (stats->parsed()) {
    std::optional<fs::path> ref;
    if (!reference.empty()) ref = reference;
    std::cout << cli::cmd_stats(g.image, ref, g.bands ? static_cast<Index>(*g.bands) : io::kDefaultBands);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const freqmix::Error& e) {
    std::cerr << "freqmix: " << e.what() << '\n';
    return freqmix::cli::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "freqmix: " << e.what() << '\n';
    return 1;
  }
}
