#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "irispad/image.hpp"
#include "irispad/vec3.hpp"

namespace irispad {

/// The k >= 2 known illumination directions (unit vectors pointing from the
/// surface toward each light). Rows of the k x 3 light matrix.
class LightRig {
 public:
  /// Normalizes the directions; throws InvalidRig when k < 2 or a vector has
  /// norm < 1e-6, RankDeficient when two directions are parallel
  /// (|dot| >= 1 - 1e-9).
  static LightRig from_directions(std::vector<Vec3> directions);

  std::size_t k() const { return directions_.size(); }
  const std::vector<Vec3>& directions() const { return directions_; }

 private:
  LightRig() = default;
  std::vector<Vec3> directions_;
};

/// JSON rig file: {"directions": [[x,y,z], ...]}.
LightRig load_rig(const std::filesystem::path& path);
void save_rig(const LightRig& rig, const std::filesystem::path& path);

/// Rig-level factorization: the 3 x k Moore-Penrose pseudoinverse of the
/// light matrix, computed once so a per-pixel solve is a single 3 x k
/// matrix-vector product.
///
/// The pseudoinverse route covers all arities with one object:
///   k == 3, invertible: the exact inverse;
///   k  > 3: the least-squares solution of the normal equations;
///   k == 2: the minimum-norm least-squares solution, i.e. the unique
///           solution in the row space of the light matrix.
class PixelSolver {
 public:
  /// Throws RankDeficient when the smallest singular value of the light
  /// matrix is below 1e-9 times the largest.
  explicit PixelSolver(const LightRig& rig);

  /// Unnormalized (albedo-scaled) normal for one pixel's k intensities.
  Vec3 solve(std::span<const double> intensities) const;

  std::size_t k() const { return k_; }

 private:
  std::size_t k_ = 0;
  std::vector<double> pinv_;  // 3 x k, row-major
};

/// One least-squares solve of I = L * n_hat. Validates the intensities
/// (NonFiniteInput) and their arity (DimensionMismatch). For repeated solves
/// construct a PixelSolver once instead.
Vec3 solve_pixel(std::span<const double> intensities, const LightRig& rig);

/// Per-pixel estimated normals. `normals` holds unit vectors (n_hat /
/// ||n_hat||) and `raw` the unnormalized albedo-scaled solutions; `valid` is
/// false where ||n_hat|| < 1e-12 and the direction is undefined.
struct NormalField {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<Vec3> normals;
  std::vector<Vec3> raw;
  BinaryMask valid;

  const Vec3& normal_at(std::uint32_t x, std::uint32_t y) const {
    return normals[static_cast<std::size_t>(y) * width + x];
  }
  const Vec3& raw_at(std::uint32_t x, std::uint32_t y) const {
    return raw[static_cast<std::size_t>(y) * width + x];
  }
};

/// Threshold below which ||n_hat|| is treated as the null solution.
inline constexpr double kNullNormThreshold = 1e-12;

/// Photometric stereo over a two-image pair. Intensities are mapped to
/// [0,1] (divided by 255) before solving; the rig must have exactly k = 2.
NormalField estimate_normals(const ImagePair& pair, const LightRig& rig);

/// Generalized entry point for k >= 2 co-registered images.
NormalField estimate_normals_multi(const std::vector<const GrayImage*>& images,
                                   const LightRig& rig);

/// Binary NormalField file: magic "NRM1", u32le width/height, then 3 float64
/// (little-endian) unit-normal components per pixel (zeros where invalid),
/// then a row-major validity bitmap packed LSB-first.
void save_normal_field(const NormalField& field, const std::filesystem::path& path);
NormalField load_normal_field(const std::filesystem::path& path);

/// Subsampled arrow plot of the field as a standalone SVG.
void save_quiver_svg(const NormalField& field, const std::filesystem::path& path,
                     std::uint32_t target_arrows_across = 32);

/// Optional per-component visualization, each component mapped [-1,1] -> [0,255].
void save_component_pgms(const NormalField& field, const std::filesystem::path& directory,
                         const std::string& stem = "normal");

}  // namespace irispad
