#include "freqmix/io/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <string>

#include "freqmix/io/fs_util.hpp"

namespace freqmix::io {
namespace {

struct ReadState {
  std::span<const unsigned char> bytes;
  std::size_t offset = 0;
  std::string message;
};

void read_callback(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<ReadState*>(png_get_io_ptr(png));
  if (st->offset + len > st->bytes.size()) {
    st->message = "unexpected end of data";
    png_error(png, "truncated");
  }
  std::memcpy(out, st->bytes.data() + st->offset, len);
  st->offset += len;
}

void error_callback(png_structp png, png_const_charp msg) {
  auto* st = static_cast<ReadState*>(png_get_error_ptr(png));
  if (st && st->message.empty()) st->message = msg;
  std::longjmp(png_jmpbuf(png), 1);
}

void warning_callback(png_structp, png_const_charp) {}

struct RawPixels {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<unsigned char> data;  // packed rows
};

// All libpng work happens here so no destructors sit between setjmp and longjmp.
bool decode_raw(ReadState& st, RawPixels& out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st, error_callback,
                                           warning_callback);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  std::vector<png_bytep>* volatile rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete rows;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &st, read_callback);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.data.assign(stride * out.height, 0);
  rows = new std::vector<png_bytep>(out.height);
  for (png_uint_32 r = 0; r < out.height; ++r) (*rows)[r] = out.data.data() + r * stride;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  delete rows;
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

struct WriteState {
  std::vector<unsigned char> bytes;
};

void write_callback(png_structp png, png_bytep data, png_size_t len) {
  auto* st = static_cast<WriteState*>(png_get_io_ptr(png));
  st->bytes.insert(st->bytes.end(), data, data + len);
}

void flush_callback(png_structp) {}

void write_error_callback(png_structp png, png_const_charp) { std::longjmp(png_jmpbuf(png), 1); }

bool encode_raw(const std::vector<unsigned char>& packed, png_uint_32 width, png_uint_32 height,
                int channels, int bit_depth, WriteState& st) {
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, write_error_callback, warning_callback);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  std::vector<png_bytep>* volatile rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete rows;
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &st, write_callback, flush_callback);
  png_set_IHDR(png, info, width, height, bit_depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  rows = new std::vector<png_bytep>(height);
  for (png_uint_32 r = 0; r < height; ++r) {
    (*rows)[r] = const_cast<png_bytep>(packed.data() + r * stride);
  }
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  delete rows;
  png_destroy_write_struct(&png, &info);
  return true;
}

unsigned quantize(double v, double max_code) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned>(std::lround(c * max_code));
}

}  // namespace

DecodedImage decode_png(std::span<const unsigned char> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw DecodeError(0, "not a PNG file (bad signature)");
  }
  ReadState st{bytes, 0, {}};
  RawPixels raw;
  if (!decode_raw(st, raw)) {
    throw DecodeError(static_cast<long long>(st.offset),
                      "PNG decode failed at byte " + std::to_string(st.offset) + ": " + st.message);
  }
  const int channels = raw.channels;
  if (channels != 1 && channels != 3) {
    throw DecodeError(-1, "unsupported PNG channel layout (" + std::to_string(channels) + ")");
  }
  Image img(raw.height, raw.width, channels);
  const double max_code = raw.bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t bpp = raw.bit_depth == 16 ? 2 : 1;
  const std::size_t stride = static_cast<std::size_t>(raw.width) * channels * bpp;
  for (png_uint_32 r = 0; r < raw.height; ++r) {
    const unsigned char* row = raw.data.data() + r * stride;
    for (png_uint_32 c = 0; c < raw.width; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        const std::size_t at = (static_cast<std::size_t>(c) * channels + ch) * bpp;
        const unsigned code = bpp == 2 ? (unsigned{row[at]} << 8) | row[at + 1] : row[at];
        img[ch](r, c) = static_cast<double>(code) / max_code;
      }
    }
  }
  return DecodedImage{std::move(img), raw.bit_depth == 16 ? 16 : 8};
}

std::vector<unsigned char> encode_png(const Image& img, int bit_depth) {
  require(bit_depth == 8 || bit_depth == 16, ErrorKind::InvalidParameter,
          "PNG bit depth must be 8 or 16");
  const auto h = static_cast<png_uint_32>(img.height());
  const auto w = static_cast<png_uint_32>(img.width());
  const auto channels = static_cast<int>(img.channels());
  const double max_code = bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t bpp = bit_depth == 16 ? 2 : 1;
  std::vector<unsigned char> packed(static_cast<std::size_t>(h) * w * channels * bpp);
  std::size_t at = 0;
  for (png_uint_32 r = 0; r < h; ++r) {
    for (png_uint_32 c = 0; c < w; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        const unsigned code = quantize(img[ch](r, c), max_code);
        if (bpp == 2) {
          packed[at++] = static_cast<unsigned char>(code >> 8);
          packed[at++] = static_cast<unsigned char>(code & 0xff);
        } else {
          packed[at++] = static_cast<unsigned char>(code);
        }
      }
    }
  }
  WriteState st;
  require(encode_raw(packed, w, h, channels, bit_depth, st), ErrorKind::Io, "PNG encode failed");
  return std::move(st.bytes);
}

Image read_image(const std::filesystem::path& path, int* bit_depth) {
  const auto bytes = read_file(path);
  try {
    DecodedImage d = decode_png(bytes);
    if (bit_depth) *bit_depth = d.bit_depth;
    return std::move(d.image);
  } catch (const DecodeError& e) {
    throw DecodeError(e.offset(), path.string() + ": " + e.what());
  }
}

void write_image(const Image& img, const std::filesystem::path& path, int bit_depth) {
  write_file_atomic(path, encode_png(img, bit_depth));
}

std::vector<unsigned char> encode_plane_png(const Plane& plane) {
  return encode_png(Image(std::vector<Plane>{plane}), 8);
}

}  // namespace freqmix::io
