#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "irispad/roi.hpp"
#include "irispad/stereo.hpp"
#include "irispad/vec3.hpp"

namespace irispad {

enum class ScoreVariant { Base, Weighted };

/// PAD score: variance of normal-vector deviations over the included pixel
/// set. Larger for irregular (textured-lens) surfaces.
struct PadScore {
  double value = 0.0;
  std::size_t n_pixels = 0;
  ScoreVariant variant = ScoreVariant::Base;
};

/// Per-pixel squared deviations l = ||n - n_mean||^2 plus the mean normal
/// they are measured against (not unit length in general).
struct DeviationField {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  Vec3 mean_normal{0, 0, 0};
  std::vector<double> l;       // squared deviation, 0 where excluded
  std::vector<std::uint8_t> included;
};

/// Population variance (divide by N). The project-wide convention for every
/// "var" in the scoring and training paths.
double population_variance(std::span<const double> values);

/// Arithmetic mean of the unit normals over mask AND field.valid; not
/// re-normalized. Throws EmptyRegion when no pixel qualifies.
Vec3 mean_normal(const NormalField& field, const BinaryMask& mask);

/// Base PAD score: population variance of the Euclidean distances
/// ||n - n_mean|| over the included pixels. Needs at least two pixels.
PadScore base_score(const NormalField& field, const BinaryMask& mask);

/// Base-score statistic over an explicit pixel index set (row-major
/// indices). Shared by the per-sector scoring path.
PadScore base_score_over(const NormalField& field, std::span<const std::uint32_t> pixel_indices);

DeviationField deviation_field(const NormalField& field, const BinaryMask& mask);

/// Weighted PAD score over per-sector weights (one weight per sector id,
/// zero = excluded). l = ||n - n_mean||^2 with n_mean the unweighted mean
/// over the included positively-weighted pixels; the score is the weighted
/// population variance of l. Invariant under uniform scaling of the weights.
PadScore weighted_score(const NormalField& field, const BinaryMask& mask, const SectorGrid& grid,
                        std::span<const double> sector_weights);

/// Same, against a prebuilt sector map (the training loop reuses maps).
PadScore weighted_score(const NormalField& field, const BinaryMask& mask, const SectorMap& map,
                        std::span<const double> sector_weights);

}  // namespace irispad
