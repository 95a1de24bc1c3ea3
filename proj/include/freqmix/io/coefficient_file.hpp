#pragma once

#include <filesystem>
#include <string>

#include "freqmix/spectral.hpp"

namespace freqmix::io {

constexpr int kCoefficientFormatVersion = 1;

/// Coefficient matrix plus the context it was produced for. Text layout:
///
///   freqmix-coefficients 1
///   sources <N+1>
///   bands <B>
///   lambda <value>
///   height <H>
///   width <W>
///   data
///   <N+1 rows of B shortest round-trip decimals>
///
/// Blank lines and lines starting with '#' are ignored.
struct CoefficientFile {
  Coefficients coefficients;
  double lambda = 0.0;
  Index height = 0;
  Index width = 0;
};

std::string format_coefficients(const CoefficientFile& file);
CoefficientFile parse_coefficients(const std::string& text);

void save_coefficients(const CoefficientFile& file, const std::filesystem::path& path);
CoefficientFile load_coefficients(const std::filesystem::path& path);

}  // namespace freqmix::io
