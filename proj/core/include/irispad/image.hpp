#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irispad/error.hpp"

namespace irispad {

/// Row-major 8-bit grayscale raster. Pixel values are observed NIR radiance
/// in [0,255]; I/O never rescales them.
struct GrayImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(std::uint32_t w, std::uint32_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
    if (w < 1 || h < 1) throw Error(ErrorCode::DimensionMismatch, "image dimensions must be >= 1");
  }

  std::uint8_t at(std::uint32_t x, std::uint32_t y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(std::uint32_t x, std::uint32_t y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return pixels.size(); }

  bool operator==(const GrayImage&) const = default;
};

/// Row-major boolean raster; true marks a usable (non-occluded) iris pixel.
struct BinaryMask {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1

  BinaryMask() = default;
  BinaryMask(std::uint32_t w, std::uint32_t h, bool fill = false)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {
    if (w < 1 || h < 1) throw Error(ErrorCode::DimensionMismatch, "mask dimensions must be >= 1");
  }

  bool at(std::uint32_t x, std::uint32_t y) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(std::uint32_t x, std::uint32_t y, bool v) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t size() const { return bits.size(); }

  std::size_t popcount() const {
    std::size_t n = 0;
    for (auto b : bits) n += b != 0;
    return n;
  }

  bool operator==(const BinaryMask&) const = default;
};

enum class Label { BonaFide, Attack, Unknown };

const char* to_string(Label label);
Label label_from_string(const std::string& s);

inline const char* to_string(Label label) {
  switch (label) {
    case Label::BonaFide: return "bonafide";
    case Label::Attack: return "attack";
    case Label::Unknown: return "unknown";
  }
  return "unknown";
}

inline Label label_from_string(const std::string& s) {
  if (s == "bonafide") return Label::BonaFide;
  if (s == "attack") return Label::Attack;
  if (s == "unknown") return Label::Unknown;
  throw Error(ErrorCode::MalformedRow, "unknown label '" + s + "'");
}

/// Two co-registered iris images of one presentation: left illuminator on,
/// then right illuminator on, each with its occlusion mask.
struct ImagePair {
  GrayImage left;
  GrayImage right;
  BinaryMask mask_left;
  BinaryMask mask_right;
  Label label = Label::Unknown;
  std::string sample_id;

  ImagePair() = default;
  ImagePair(GrayImage l, GrayImage r, BinaryMask ml, BinaryMask mr,
            Label lab = Label::Unknown, std::string id = {})
      : left(std::move(l)), right(std::move(r)), mask_left(std::move(ml)),
        mask_right(std::move(mr)), label(lab), sample_id(std::move(id)) {
    const bool same = left.width == right.width && left.height == right.height &&
                      mask_left.width == left.width && mask_left.height == left.height &&
                      mask_right.width == left.width && mask_right.height == left.height;
    if (!same) throw Error(ErrorCode::DimensionMismatch, "pair rasters must share dimensions");
  }

  std::uint32_t width() const { return left.width; }
  std::uint32_t height() const { return left.height; }
};

}  // namespace irispad
