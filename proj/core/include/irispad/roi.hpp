#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "irispad/image.hpp"

namespace irispad {

/// Pupil and limbic circles in pixel coordinates. The pupil circle must lie
/// strictly inside the iris circle.
struct AnnulusGeometry {
  double pupil_cx = 0, pupil_cy = 0, pupil_r = 0;
  double iris_cx = 0, iris_cy = 0, iris_r = 0;

  /// Throws InvalidGeometry unless pupil_r > 0, pupil_r < iris_r and the
  /// pupil circle is contained in the iris circle.
  void validate() const;

  bool operator==(const AnnulusGeometry&) const = default;
};

struct SectorGridParams {
  int radial = 1;   // r: radial section count
  int angular = 1;  // t: angular section count

  int sector_count() const { return radial * angular; }
  bool operator==(const SectorGridParams&) const = default;
};

/// The r x t decomposition of one annulus. Sector ids are i * t + j where i
/// is the radial index (0 at the pupil) and j the angular index (0 at the
/// positive-x axis, advancing counterclockwise in image coordinates).
struct SectorGrid {
  AnnulusGeometry geometry;
  SectorGridParams params;

  SectorGrid(AnnulusGeometry geom, SectorGridParams p);
};

/// Logical AND of the two occlusion masks of a pair.
BinaryMask combined_mask(const ImagePair& pair);
BinaryMask combined_mask(const BinaryMask& a, const BinaryMask& b);

/// True where the pixel center (x+0.5, y+0.5) lies inside the iris circle
/// and outside the pupil circle.
BinaryMask annulus_mask(const AnnulusGeometry& geom, std::uint32_t width, std::uint32_t height);

/// Sector of the pixel at (x, y), or nullopt outside the annulus. The radial
/// coordinate interpolates between the pupil and iris boundary points along
/// the ray from the pupil center (rubber-sheet convention); angles are
/// measured around the pupil center.
std::optional<std::pair<int, int>> sector_index(const SectorGrid& grid, std::uint32_t x,
                                                std::uint32_t y);

/// Per-pixel sector ids for a whole raster; -1 marks pixels outside the
/// annulus. Built once and reused by the scoring paths.
struct SectorMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  SectorGridParams params;
  std::vector<std::int32_t> ids;  // sector id or -1

  std::int32_t at(std::uint32_t x, std::uint32_t y) const {
    return ids[static_cast<std::size_t>(y) * width + x];
  }
};

SectorMap build_sector_map(const SectorGrid& grid, std::uint32_t width, std::uint32_t height);

/// Writes the sector map as 16-bit PGM for visual debugging
/// (sector id + 1, 0 = outside the annulus).
void save_sector_map(const SectorMap& map, const std::filesystem::path& path);

}  // namespace irispad
