#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irispad/roi.hpp"
#include "irispad/score.hpp"
#include "irispad/stereo.hpp"

namespace irispad {

/// d' separability of two score distributions:
/// (mu_a - mu_c) / sqrt(0.5 (sigma_a^2 + sigma_c^2)).
/// When both sigmas are zero: +/-infinity with the sign of the mean
/// difference, or 0 when the means are also equal.
double dprime(double mu_authentic, double sigma_authentic, double mu_contact,
              double sigma_contact);

/// One training sample prepared for sector analysis. The mask is the
/// combined non-occlusion mask (annulus intersection already applied or not;
/// sector assignment restricts to the annulus either way).
struct AreaSample {
  const NormalField* field = nullptr;
  const BinaryMask* mask = nullptr;
  AnnulusGeometry geometry;
  bool is_attack = false;
};

/// Per-sample, per-sector base scores. Missing cells mark sectors with fewer
/// than two usable pixels in that sample.
struct SectorScoreMatrix {
  std::size_t n_samples = 0;
  SectorGridParams params;
  std::vector<std::optional<double>> cells;  // n_samples x sector_count, row-major

  const std::optional<double>& at(std::size_t sample, int sector) const {
    return cells[sample * params.sector_count() + sector];
  }
};

SectorScoreMatrix sector_scores(std::span<const AreaSample> samples,
                                const SectorGridParams& params);

/// Class-conditional moments and d' of one sector's score distribution.
/// Population variance, matching the score module. `defined` is false when a
/// class has no scores in this sector.
struct SectorStats {
  int sector = 0;
  double mu_authentic = 0, sigma_authentic = 0;
  double mu_contact = 0, sigma_contact = 0;
  double dprime = 0;
  std::size_t n_authentic = 0, n_contact = 0;
  bool defined = false;
};

std::vector<SectorStats> sector_stats(const SectorScoreMatrix& scores,
                                      std::span<const std::uint8_t> is_attack);

struct TrainOptions {
  /// Rank sectors (and pick the best iteration) by signed d' instead of
  /// |d'|. Under the printed sign convention attack scores exceed bona fide
  /// ones, making useful d' negative, so the default ranks by magnitude.
  bool signed_dprime = false;
};

struct SelectedSector {
  int radial = 0;   // i
  int angular = 0;  // j
  double dprime = 0;  // signed
};

/// Trained weight map: the selected sectors with their d' values, plus the
/// per-iteration history of the global training-set d'.
struct AreaModel {
  SectorGridParams params;
  std::vector<SelectedSector> selected;
  std::vector<std::pair<int, double>> history;  // (p, global d') for p = 1..rt
  double global_dprime = 0;                     // at the chosen iteration
  int chosen_p = 0;
  std::vector<SectorStats> stats;  // all sectors; not serialized

  /// Dense weight vector (|d'| on selected sectors, 0 elsewhere), indexed by
  /// sector id = i * t + j.
  std::vector<double> weights() const;
};

/// Clamp applied to |d'| when used as a sector weight; the weighted
/// score is invariant to uniform weight scaling, so this only keeps the
/// arithmetic finite for degenerate (infinite-d') sectors.
inline constexpr double kWeightClamp = 1e12;

/// The iterative best-area search: per-sector d' from the training set,
/// sectors ranked by d', then rt iterations in which the top-p sectors form
/// the weight map and the global d' of the resulting weighted-score
/// distributions is recorded; the best iteration defines the model.
AreaModel train_area_model(std::span<const AreaSample> samples, const SectorGridParams& params,
                           const TrainOptions& options = {});

/// Trains one model per (r, t) combination and returns the best by global
/// d'; ties break to smaller r*t, then smaller r, then smaller t.
AreaModel grid_search(std::span<const AreaSample> samples,
                      std::span<const int> radial_candidates,
                      std::span<const int> angular_candidates,
                      const TrainOptions& options = {});

/// Default search space.
inline constexpr int kDefaultRadialCandidates[] = {4, 5};
inline constexpr int kDefaultAngularCandidates[] = {10, 15};

AreaModel grid_search(std::span<const AreaSample> samples, const TrainOptions& options = {});

/// Model JSON:
/// {"r":..,"t":..,"geometry_convention":"pupil-ray",
///  "selected":[{"i":..,"j":..,"dprime":..}],"history":[[p,dprime],...]}
void save_area_model(const AreaModel& model, const std::filesystem::path& path);
AreaModel load_area_model(const std::filesystem::path& path);

/// Renders |d'| of every defined sector onto a canonical concentric annulus
/// raster, scaled to [0,255] (0 = outside or undefined).
GrayImage significance_map(const AreaModel& model, std::uint32_t size = 512);

}  // namespace irispad
