#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "freqmix/image.hpp"

namespace freqmix::io {

struct DecodedImage {
  Image image;
  int bit_depth = 8;  // 8 or 16
};

/// Decodes 8/16-bit grayscale or RGB PNG data (palette and low bit depths are
/// expanded; alpha is dropped). Throws DecodeError with the byte offset at which
/// decoding stopped.
DecodedImage decode_png(std::span<const unsigned char> bytes);

/// Clamps to [0,1] and quantizes to `bit_depth` (8 or 16).
std::vector<unsigned char> encode_png(const Image& img, int bit_depth);

Image read_image(const std::filesystem::path& path, int* bit_depth = nullptr);
void write_image(const Image& img, const std::filesystem::path& path, int bit_depth = 8);

/// Gray 8-bit rendering of a single plane, values clamped to [0,1].
std::vector<unsigned char> encode_plane_png(const Plane& plane);

}  // namespace freqmix::io
