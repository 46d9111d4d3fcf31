#include "irispad/score.hpp"

#include "accum.hpp"

namespace irispad {
namespace {

void check_dims(const NormalField& field, const BinaryMask& mask) {
  if (field.width != mask.width || field.height != mask.height)
    throw Error(ErrorCode::DimensionMismatch, "mask dimensions differ from normal field");
}

}  // namespace

double population_variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  Accum sum;
  for (const double v : values) sum.add(v);
  const double mean = sum.value() / static_cast<double>(values.size());
  Accum sq;
  for (const double v : values) sq.add((v - mean) * (v - mean));
  return sq.value() / static_cast<double>(values.size());
}

Vec3 mean_normal(const NormalField& field, const BinaryMask& mask) {
  check_dims(field, mask);
  Accum sx, sy, sz;
  std::size_t n = 0;
  for (std::size_t p = 0; p < field.normals.size(); ++p) {
    if (!mask.bits[p] || !field.valid.bits[p]) continue;
    sx.add(field.normals[p][0]);
    sy.add(field.normals[p][1]);
    sz.add(field.normals[p][2]);
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::EmptyRegion, "no included pixels");
  const double inv = 1.0 / static_cast<double>(n);
  return {sx.value() * inv, sy.value() * inv, sz.value() * inv};
}

PadScore base_score_over(const NormalField& field, std::span<const std::uint32_t> pixel_indices) {
  Accum sx, sy, sz;
  std::size_t n = 0;
  for (const std::uint32_t p : pixel_indices) {
    if (!field.valid.bits[p]) continue;
    sx.add(field.normals[p][0]);
    sy.add(field.normals[p][1]);
    sz.add(field.normals[p][2]);
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::EmptyRegion, "no included pixels");
  if (n < 2) throw Error(ErrorCode::DegenerateRegion, "variance needs at least 2 pixels");
  const double inv = 1.0 / static_cast<double>(n);
  const Vec3 mean{sx.value() * inv, sy.value() * inv, sz.value() * inv};

  // Two passes over the deviations: their mean, then their spread.
  Accum dsum;
  for (const std::uint32_t p : pixel_indices) {
    if (!field.valid.bits[p]) continue;
    dsum.add(norm(sub(field.normals[p], mean)));
  }
  const double dmean = dsum.value() * inv;
  Accum var;
  for (const std::uint32_t p : pixel_indices) {
    if (!field.valid.bits[p]) continue;
    const double d = norm(sub(field.normals[p], mean)) - dmean;
    var.add(d * d);
  }
  return PadScore{var.value() * inv, n, ScoreVariant::Base};
}

PadScore base_score(const NormalField& field, const BinaryMask& mask) {
  check_dims(field, mask);
  std::vector<std::uint32_t> indices;
  indices.reserve(mask.popcount());
  for (std::size_t p = 0; p < mask.bits.size(); ++p)
    if (mask.bits[p]) indices.push_back(static_cast<std::uint32_t>(p));
  return base_score_over(field, indices);
}

DeviationField deviation_field(const NormalField& field, const BinaryMask& mask) {
  check_dims(field, mask);
  DeviationField out;
  out.width = field.width;
  out.height = field.height;
  out.mean_normal = mean_normal(field, mask);
  out.l.assign(field.normals.size(), 0.0);
  out.included.assign(field.normals.size(), 0);
  for (std::size_t p = 0; p < field.normals.size(); ++p) {
    if (!mask.bits[p] || !field.valid.bits[p]) continue;
    const Vec3 d = sub(field.normals[p], out.mean_normal);
    out.l[p] = dot(d, d);
    out.included[p] = 1;
  }
  return out;
}

PadScore weighted_score(const NormalField& field, const BinaryMask& mask, const SectorMap& map,
                        std::span<const double> sector_weights) {
  check_dims(field, mask);
  if (map.width != field.width || map.height != field.height)
    throw Error(ErrorCode::DimensionMismatch, "sector map dimensions differ from normal field");
  if (static_cast<int>(sector_weights.size()) != map.params.sector_count())
    throw Error(ErrorCode::DimensionMismatch, "one weight per sector required");
  for (const double w : sector_weights)
    if (!(w >= 0)) throw Error(ErrorCode::AllZeroWeights, "weights must be >= 0");

  // Included pixels: masked, valid, inside the annulus, in a sector with a
  // positive weight. The mean normal is the unweighted mean over that set.
  Accum sx, sy, sz;
  std::size_t n = 0;
  std::size_t in_annulus = 0;
  for (std::size_t p = 0; p < field.normals.size(); ++p) {
    if (!mask.bits[p] || !field.valid.bits[p]) continue;
    const std::int32_t sector = map.ids[p];
    if (sector < 0) continue;
    ++in_annulus;
    if (sector_weights[static_cast<std::size_t>(sector)] <= 0) continue;
    sx.add(field.normals[p][0]);
    sy.add(field.normals[p][1]);
    sz.add(field.normals[p][2]);
    ++n;
  }
  if (in_annulus == 0) throw Error(ErrorCode::EmptyRegion, "no included pixels");
  if (n == 0) throw Error(ErrorCode::AllZeroWeights, "no included pixel has positive weight");
  const double inv = 1.0 / static_cast<double>(n);
  const Vec3 mean{sx.value() * inv, sy.value() * inv, sz.value() * inv};

  Accum wl, wsum;
  for (std::size_t p = 0; p < field.normals.size(); ++p) {
    if (!mask.bits[p] || !field.valid.bits[p]) continue;
    const std::int32_t sector = map.ids[p];
    if (sector < 0) continue;
    const double w = sector_weights[static_cast<std::size_t>(sector)];
    if (w <= 0) continue;
    const Vec3 d = sub(field.normals[p], mean);
    wl.add(w * dot(d, d));
    wsum.add(w);
  }
  const double lw = wl.value() / wsum.value();

  Accum num;
  for (std::size_t p = 0; p < field.normals.size(); ++p) {
    if (!mask.bits[p] || !field.valid.bits[p]) continue;
    const std::int32_t sector = map.ids[p];
    if (sector < 0) continue;
    const double w = sector_weights[static_cast<std::size_t>(sector)];
    if (w <= 0) continue;
    const Vec3 d = sub(field.normals[p], mean);
    const double l = dot(d, d);
    num.add(w * (l - lw) * (l - lw));
  }
  return PadScore{num.value() / wsum.value(), n, ScoreVariant::Weighted};
}

PadScore weighted_score(const NormalField& field, const BinaryMask& mask, const SectorGrid& grid,
                        std::span<const double> sector_weights) {
  const SectorMap map = build_sector_map(grid, field.width, field.height);
  return weighted_score(field, mask, map, sector_weights);
}

}  // namespace irispad
