#include "irispad/imageio.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>

namespace irispad {
namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return data;
}

// Skips PGM header whitespace, treating '#' comment lines as whitespace.
void skip_space_and_comments(const std::vector<std::uint8_t>& data, std::size_t& pos) {
  while (pos < data.size()) {
    const char c = static_cast<char>(data[pos]);
    if (c == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
      ++pos;
    } else {
      break;
    }
  }
}

std::uint64_t parse_pgm_uint(const std::vector<std::uint8_t>& data, std::size_t& pos,
                             const std::filesystem::path& path) {
  skip_space_and_comments(data, pos);
  if (pos >= data.size() || data[pos] < '0' || data[pos] > '9')
    throw Error(ErrorCode::CorruptFile, "bad PGM header in " + path.string());
  std::uint64_t value = 0;
  while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
    value = value * 10 + (data[pos] - '0');
    if (value > std::numeric_limits<std::uint32_t>::max())
      throw Error(ErrorCode::CorruptFile, "PGM header value overflow in " + path.string());
    ++pos;
  }
  return value;
}

GrayImage load_pgm(const std::vector<std::uint8_t>& data, const std::filesystem::path& path) {
  std::size_t pos = 2;  // past "P5"
  const std::uint64_t width = parse_pgm_uint(data, pos, path);
  const std::uint64_t height = parse_pgm_uint(data, pos, path);
  const std::uint64_t maxval = parse_pgm_uint(data, pos, path);
  if (maxval != 255)
    throw Error(ErrorCode::DepthMismatch,
                "PGM maxval " + std::to_string(maxval) + " (need 255) in " + path.string());
  if (width < 1 || height < 1)
    throw Error(ErrorCode::CorruptFile, "zero PGM dimension in " + path.string());
  // Exactly one whitespace byte separates the header from the payload.
  if (pos >= data.size() || !std::isspace(data[pos]))
    throw Error(ErrorCode::CorruptFile, "missing payload separator in " + path.string());
  ++pos;
  const std::size_t expected = static_cast<std::size_t>(width) * height;
  if (data.size() - pos < expected)
    throw Error(ErrorCode::CorruptFile, "truncated PGM payload in " + path.string());
  GrayImage image(static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height));
  std::memcpy(image.pixels.data(), data.data() + pos, expected);
  return image;
}

struct PngMemoryReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
  auto* reader = static_cast<PngMemoryReader*>(png_get_io_ptr(png));
  if (reader->pos + n > reader->size) png_error(png, "truncated PNG stream");
  std::memcpy(out, reader->data + reader->pos, n);
  reader->pos += n;
}

GrayImage load_png(const std::vector<std::uint8_t>& data, const std::filesystem::path& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::IoError, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::IoError, "libpng init failed");
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::CorruptFile, "libpng failed to decode " + path.string());
  }

  PngMemoryReader reader{data.data(), data.size(), 0};
  png_set_read_fn(png, &reader, png_mem_read);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::UnsupportedFormat,
                "PNG is not single-channel grayscale: " + path.string());
  }
  if (bit_depth != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::DepthMismatch,
                "PNG bit depth " + std::to_string(bit_depth) + " (need 8) in " + path.string());
  }

  GrayImage image(width, height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y)
    rows[y] = image.pixels.data() + static_cast<std::size_t>(y) * width;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

}  // namespace

GrayImage load_gray(const std::filesystem::path& path) {
  const auto data = read_all(path);
  if (data.size() >= 2 && data[0] == 'P' && data[1] == '5') return load_pgm(data, path);
  if (data.size() >= 8 && std::memcmp(data.data(), kPngMagic, 8) == 0) return load_png(data, path);
  throw Error(ErrorCode::UnsupportedFormat, "not a P5 PGM or grayscale PNG: " + path.string());
}

void save_gray(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

BinaryMask load_mask(const std::filesystem::path& path) {
  const GrayImage raster = load_gray(path);
  BinaryMask mask(raster.width, raster.height);
  for (std::size_t i = 0; i < raster.pixels.size(); ++i) mask.bits[i] = raster.pixels[i] >= 128;
  return mask;
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  GrayImage raster(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) raster.pixels[i] = mask.bits[i] ? 255 : 0;
  save_gray(raster, path);
}

void save_pgm16(std::uint32_t width, std::uint32_t height,
                const std::vector<std::uint16_t>& samples, const std::filesystem::path& path) {
  if (samples.size() != static_cast<std::size_t>(width) * height)
    throw Error(ErrorCode::DimensionMismatch, "sample count != width * height");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << "P5\n" << width << " " << height << "\n65535\n";
  for (const std::uint16_t s : samples) {
    const char bytes[2] = {static_cast<char>(s >> 8), static_cast<char>(s & 0xff)};
    out.write(bytes, 2);
  }
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace irispad
