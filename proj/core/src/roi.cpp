#include "irispad/roi.hpp"

#include <cmath>
#include <numbers>

#include "irispad/imageio.hpp"

namespace irispad {

void AnnulusGeometry::validate() const {
  if (!(pupil_r > 0)) throw Error(ErrorCode::InvalidGeometry, "pupil_r must be > 0");
  if (!(pupil_r < iris_r)) throw Error(ErrorCode::InvalidGeometry, "pupil_r must be < iris_r");
  const double dx = pupil_cx - iris_cx;
  const double dy = pupil_cy - iris_cy;
  if (std::hypot(dx, dy) + pupil_r > iris_r)
    throw Error(ErrorCode::InvalidGeometry, "pupil circle not contained in iris circle");
}

SectorGrid::SectorGrid(AnnulusGeometry geom, SectorGridParams p) : geometry(geom), params(p) {
  geometry.validate();
  if (params.radial < 1 || params.angular < 1)
    throw Error(ErrorCode::InvalidGeometry, "sector counts must be >= 1");
}

BinaryMask combined_mask(const BinaryMask& a, const BinaryMask& b) {
  if (a.width != b.width || a.height != b.height)
    throw Error(ErrorCode::DimensionMismatch, "mask dimensions differ");
  BinaryMask out(a.width, a.height);
  for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] = a.bits[i] & b.bits[i];
  return out;
}

BinaryMask combined_mask(const ImagePair& pair) {
  return combined_mask(pair.mask_left, pair.mask_right);
}

namespace {

// Annulus membership of the pixel center: inside (or on) the iris circle and
// strictly outside the pupil circle. Squared distances, no square roots.
bool in_annulus(const AnnulusGeometry& g, double px, double py) {
  const double di2 = (px - g.iris_cx) * (px - g.iris_cx) + (py - g.iris_cy) * (py - g.iris_cy);
  if (di2 > g.iris_r * g.iris_r) return false;
  const double dp2 = (px - g.pupil_cx) * (px - g.pupil_cx) + (py - g.pupil_cy) * (py - g.pupil_cy);
  return dp2 > g.pupil_r * g.pupil_r;
}

}  // namespace

BinaryMask annulus_mask(const AnnulusGeometry& geom, std::uint32_t width, std::uint32_t height) {
  geom.validate();
  BinaryMask mask(width, height);
  for (std::uint32_t y = 0; y < height; ++y)
    for (std::uint32_t x = 0; x < width; ++x)
      if (in_annulus(geom, x + 0.5, y + 0.5)) mask.set(x, y, true);
  return mask;
}

std::optional<std::pair<int, int>> sector_index(const SectorGrid& grid, std::uint32_t x,
                                                std::uint32_t y) {
  const AnnulusGeometry& g = grid.geometry;
  const double px = x + 0.5, py = y + 0.5;
  if (!in_annulus(g, px, py)) return std::nullopt;

  const double vx = px - g.pupil_cx;
  const double vy = py - g.pupil_cy;
  const double rho = std::hypot(vx, vy);  // > pupil_r by the annulus test

  // Outer boundary distance along this ray: intersect the ray from the pupil
  // center with the iris circle (the positive root always exists because the
  // pupil circle is contained in the iris circle).
  const double dx = vx / rho, dy = vy / rho;
  const double ux = g.pupil_cx - g.iris_cx;
  const double uy = g.pupil_cy - g.iris_cy;
  const double ud = ux * dx + uy * dy;
  const double disc = ud * ud - (ux * ux + uy * uy) + g.iris_r * g.iris_r;
  const double s = -ud + std::sqrt(disc);

  const double span = s - g.pupil_r;
  double rho_norm = span > 0 ? (rho - g.pupil_r) / span : 0.0;
  int i = static_cast<int>(std::floor(grid.params.radial * rho_norm));
  i = std::max(0, std::min(grid.params.radial - 1, i));

  double theta = std::atan2(vy, vx);
  if (theta < 0) theta += 2.0 * std::numbers::pi;
  int j = static_cast<int>(std::floor(grid.params.angular * theta / (2.0 * std::numbers::pi)));
  j = std::max(0, std::min(grid.params.angular - 1, j));

  return std::make_pair(i, j);
}

SectorMap build_sector_map(const SectorGrid& grid, std::uint32_t width, std::uint32_t height) {
  SectorMap map;
  map.width = width;
  map.height = height;
  map.params = grid.params;
  map.ids.assign(static_cast<std::size_t>(width) * height, -1);
  for (std::uint32_t y = 0; y < height; ++y)
    for (std::uint32_t x = 0; x < width; ++x)
      if (const auto ij = sector_index(grid, x, y))
        map.ids[static_cast<std::size_t>(y) * width + x] =
            ij->first * grid.params.angular + ij->second;
  return map;
}

void save_sector_map(const SectorMap& map, const std::filesystem::path& path) {
  std::vector<std::uint16_t> samples(map.ids.size());
  for (std::size_t i = 0; i < map.ids.size(); ++i)
    samples[i] = static_cast<std::uint16_t>(map.ids[i] + 1);
  save_pgm16(map.width, map.height, samples, path);
}

}  // namespace irispad
