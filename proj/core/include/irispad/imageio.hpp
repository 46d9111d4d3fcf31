#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "irispad/image.hpp"

namespace irispad {

/// Loads a binary PGM (P5, maxval 255) or an 8-bit grayscale PNG.
/// Pixel values are returned exactly as stored, no rescaling, no gamma.
GrayImage load_gray(const std::filesystem::path& path);

/// Writes the canonical on-disk form: binary PGM, "P5\n<w> <h>\n255\n" + payload.
void save_gray(const GrayImage& image, const std::filesystem::path& path);

/// Loads an 8-bit grayscale raster and thresholds it: value >= 128 -> true.
/// Both {0,1} and {0,255} mask encodings are accepted.
BinaryMask load_mask(const std::filesystem::path& path);

/// Writes a mask as binary PGM with values {0, 255}.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

/// 16-bit PGM writer (maxval 65535, MSB-first samples per the Netpbm spec).
/// Used for sector-map exports.
void save_pgm16(std::uint32_t width, std::uint32_t height,
                const std::vector<std::uint16_t>& samples, const std::filesystem::path& path);

}  // namespace irispad
