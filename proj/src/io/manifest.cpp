#include "freqmix/io/manifest.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "freqmix/io/fs_util.hpp"
#include "freqmix/objective.hpp"

namespace freqmix::io {
namespace {

[[noreturn]] void manifest_error(const std::string& what) { fail(ErrorKind::Manifest, "manifest: " + what); }

struct Entry {
  std::string key;
  std::string value;
  int line;
};

std::vector<Entry> parse_entries(const std::string& text, const std::string& magic) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool seen_header = false;
  std::vector<Entry> out;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!seen_header) {
      const std::string expected = magic + " " + std::to_string(kManifestVersion);
      if (line != expected) manifest_error("expected header '" + expected + "' on line " + std::to_string(line_no));
      seen_header = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) manifest_error("line " + std::to_string(line_no) + " is not 'key = value'");
    Entry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no};
    if (e.key.empty()) manifest_error("empty key on line " + std::to_string(line_no));
    out.push_back(std::move(e));
  }
  if (!seen_header) manifest_error("missing '" + magic + "' header");
  return out;
}

double as_double(const Entry& e) {
  double v = 0.0;
  if (!parse_double(e.value, v) || !std::isfinite(v)) manifest_error("'" + e.key + "' is not a finite number: '" + e.value + "'");
  return v;
}

long long as_int(const Entry& e) {
  long long v = 0;
  if (!parse_int(e.value, v)) manifest_error("'" + e.key + "' is not an integer: '" + e.value + "'");
  return v;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<int> parse_scales(const Entry& e) {
  std::vector<int> out;
  for (const auto& part : split(e.value, ',')) {
    long long v = 0;
    if (!parse_int(part, v)) manifest_error("bad scale '" + part + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// Applies run-setting entries to `m`. Returns entries it did not consume.
std::vector<Entry> apply_settings(const std::vector<Entry>& entries, const fs::path& base,
                                  RunManifest& m, bool allow_sources) {
  std::set<std::string> seen;
  std::vector<Entry> rest;
  VariantConfig vc;
  bool generated_keys = false;
  std::optional<Enhancer> enhancer;
  for (const auto& e : entries) {
    if (e.key != "image" && !seen.insert(e.key).second) manifest_error("duplicate key '" + e.key + "'");
    if (allow_sources && e.key == "original") {
      m.original = resolve(base, e.value);
    } else if (allow_sources && e.key == "variants") {
      std::vector<fs::path> paths;
      for (const auto& p : split(e.value, ',')) {
        if (p.empty()) manifest_error("empty path in 'variants'");
        paths.push_back(resolve(base, p));
      }
      m.variant_paths = std::move(paths);
    } else if (e.key == "enhancer") {
      try {
        enhancer = enhancer_from_string(e.value);
      } catch (const Error&) {
        manifest_error("unknown enhancer '" + e.value + "'");
      }
    } else if (e.key == "scales") {
      vc.scales = parse_scales(e);
      generated_keys = true;
    } else if (e.key == "unsharp_radius") {
      vc.unsharp_radius = as_double(e);
      generated_keys = true;
    } else if (e.key == "unsharp_amount") {
      vc.unsharp_amount = as_double(e);
      generated_keys = true;
    } else if (e.key == "lambda") {
      m.lambda = as_double(e);
    } else if (e.key == "bands") {
      m.bands = static_cast<Index>(as_int(e));
    } else if (e.key == "steps") {
      m.optimizer.steps = static_cast<int>(as_int(e));
    } else if (e.key == "step_size") {
      m.optimizer.step_size = as_double(e);
    } else if (e.key == "beta1") {
      m.optimizer.beta1 = as_double(e);
    } else if (e.key == "beta2") {
      m.optimizer.beta2 = as_double(e);
    } else if (e.key == "epsilon") {
      m.optimizer.epsilon = as_double(e);
    } else if (e.key == "init_bias") {
      m.optimizer.init_bias = as_double(e);
    } else if (e.key == "seed") {
      const long long s = as_int(e);
      if (s < 0) manifest_error("seed must be non-negative");
      m.optimizer.seed = static_cast<std::uint64_t>(s);
    } else if (e.key == "convergence_tol") {
      m.optimizer.convergence_tol = as_double(e);
    } else if (e.key == "out_dir") {
      m.out_dir = resolve(base, e.value);
    } else {
      rest.push_back(e);
    }
  }
  if (m.variant_paths) {
    if (generated_keys || (enhancer && *enhancer != Enhancer::External)) {
      manifest_error("give either 'variants' or generated-variant settings, not both");
    }
    m.variant_config.reset();
  } else {
    if (enhancer == Enhancer::External) manifest_error("enhancer 'external' requires 'variants'");
    if (enhancer) vc.enhancer = *enhancer;
    m.variant_config = vc;
  }
  return rest;
}

}  // namespace

void RunManifest::validate() const {
  if (original.empty()) manifest_error("'original' is required");
  if (!fs::is_regular_file(original)) manifest_error("original image '" + original.string() + "' does not exist");
  if (variant_paths.has_value() == variant_config.has_value()) {
    manifest_error("exactly one of variant paths and variant settings must be given");
  }
  if (variant_paths) {
    if (variant_paths->empty()) manifest_error("'variants' is empty");
    for (const auto& p : *variant_paths) {
      if (!fs::is_regular_file(p)) manifest_error("variant image '" + p.string() + "' does not exist");
    }
  } else {
    try {
      variant_config->validate();
    } catch (const Error& e) {
      manifest_error(e.what());
    }
  }
  if (!(std::isfinite(lambda) && lambda >= 0.0 && lambda <= 1.0)) manifest_error("lambda must lie in [0,1]");
  if (bands < 2) manifest_error("bands must be >= 2");
  try {
    optimizer.validate();
  } catch (const Error& e) {
    manifest_error(e.what());
  }
  if (out_dir.empty()) manifest_error("'out_dir' is empty");
}

RunManifest parse_manifest(const std::string& text, const fs::path& base_dir) {
  RunManifest m;
  const auto rest = apply_settings(parse_entries(text, "freqmix-manifest"), base_dir, m, true);
  if (!rest.empty()) manifest_error("unknown key '" + rest.front().key + "' on line " + std::to_string(rest.front().line));
  return m;
}

RunManifest load_manifest(const fs::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error&) {
    manifest_error("cannot read '" + path.string() + "'");
  }
  return parse_manifest(text, path.parent_path());
}

std::string format_manifest(const RunManifest& m) {
  std::ostringstream out;
  out << "freqmix-manifest " << kManifestVersion << '\n';
  out << "original = " << m.original.string() << '\n';
  if (m.variant_paths) {
    out << "variants = ";
    for (std::size_t i = 0; i < m.variant_paths->size(); ++i) out << (i ? "," : "") << (*m.variant_paths)[i].string();
    out << '\n';
  } else if (m.variant_config) {
    out << "enhancer = " << to_string(m.variant_config->enhancer) << '\n';
    out << "scales = ";
    for (std::size_t i = 0; i < m.variant_config->scales.size(); ++i) out << (i ? "," : "") << m.variant_config->scales[i];
    out << '\n';
    out << "unsharp_radius = " << format_double(m.variant_config->unsharp_radius) << '\n';
    out << "unsharp_amount = " << format_double(m.variant_config->unsharp_amount) << '\n';
  }
  out << "lambda = " << format_double(m.lambda) << '\n';
  out << "bands = " << m.bands << '\n';
  out << "steps = " << m.optimizer.steps << '\n';
  out << "step_size = " << format_double(m.optimizer.step_size) << '\n';
  out << "beta1 = " << format_double(m.optimizer.beta1) << '\n';
  out << "beta2 = " << format_double(m.optimizer.beta2) << '\n';
  out << "epsilon = " << format_double(m.optimizer.epsilon) << '\n';
  out << "init_bias = " << format_double(m.optimizer.init_bias) << '\n';
  out << "seed = " << m.optimizer.seed << '\n';
  out << "convergence_tol = " << format_double(m.optimizer.convergence_tol) << '\n';
  out << "out_dir = " << m.out_dir.string() << '\n';
  return out.str();
}

CorpusManifest parse_corpus(const std::string& text, const fs::path& base_dir) {
  CorpusManifest c;
  const auto rest = apply_settings(parse_entries(text, "freqmix-corpus"), base_dir, c.settings, false);
  for (const auto& e : rest) {
    if (e.key != "image") manifest_error("unknown key '" + e.key + "' on line " + std::to_string(e.line));
    c.images.push_back(resolve(base_dir, e.value));
  }
  if (c.images.empty()) manifest_error("corpus lists no images");
  return c;
}

CorpusManifest load_corpus(const fs::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error&) {
    manifest_error("cannot read '" + path.string() + "'");
  }
  return parse_corpus(text, path.parent_path());
}

}  // namespace freqmix::io
