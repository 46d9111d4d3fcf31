#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "irispad/image.hpp"
#include "irispad/manifest.hpp"
#include "irispad/roi.hpp"
#include "irispad/stereo.hpp"

namespace irispad {

enum class SurfaceKind { FlatIris, BumpyLens };

/// Restriction of the surface perturbation in normalized annulus
/// coordinates: radial fraction rho in [0,1] (0 = pupil boundary) and angle
/// theta in [0, 2*pi). Default covers the whole annulus.
struct AnnulusRegion {
  double rho_min = 0.0, rho_max = 1.0;
  double theta_min = 0.0, theta_max = 6.283185307179586476925286766559;

  bool contains(double rho, double theta) const {
    return rho >= rho_min && rho < rho_max && theta >= theta_min && theta < theta_max;
  }
  bool full() const;
};

/// Parameters of the synthetic surface the forward model renders.
/// FlatIris keeps slopes small (authentic texture); BumpyLens adds
/// large-amplitude perturbations plus opaque print dots whose shadows darken
/// one of the two images, which is what drives the normal-variance score up.
struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::FlatIris;
  Vec3 base_normal{0, 0, 1};
  std::uint64_t texture_seed = 0;
  double bump_amplitude = 0.02;    // slope scale of the value-noise field
  int bump_count = 6;              // noise cells across the image width
  double opaque_dot_fraction = 0;  // fraction of annulus covered by zero-albedo dots
  double albedo_low = 0.70, albedo_high = 0.95;
  AnnulusRegion region;            // where the perturbation applies
  double rim_amplitude = 0;        // clear-lens boundary ridge slope
  double rim_width = 0.12;         // radial fraction occupied by the rim

  /// Throws InvalidSpec on contradictions (FlatIris with dots or large
  /// amplitude, empty albedo range, negative parameters).
  void validate() const;

  static SurfaceSpec flat_iris(std::uint64_t seed);
  static SurfaceSpec bumpy_lens(std::uint64_t seed);
  static SurfaceSpec clear_lens(std::uint64_t seed);
};

struct SynthSample {
  ImagePair pair;
  NormalField truth_normals;
  AnnulusGeometry geometry;
  std::size_t clamp_events = 0;  // intensities clipped during rendering
};

/// Renders a sample under the Lambertian forward model: per-pixel
/// I_d = clamp(albedo * max(0, dot(light_d, n)), 0, 1) for each rig light,
/// plus Gaussian noise of the given sigma (on the [0,1] scale), quantized to
/// 8 bits. Deterministic per (spec.texture_seed).
SynthSample generate(const SurfaceSpec& spec, const AnnulusGeometry& geometry,
                     const LightRig& rig, std::uint32_t width, std::uint32_t height,
                     double noise_sigma);

struct CorpusParams {
  std::size_t n_bonafide = 0;
  std::size_t n_attack = 0;
  std::size_t n_clear = 0;
  std::uint32_t width = 160, height = 160;
  double bump_amplitude = 0.5;   // attack perturbation scale
  double dot_fraction = 0.06;    // attack opaque-dot coverage
  double flat_amplitude = 0.02;  // bona fide texture scale
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Default test rig used by synthetic experiments only: two lights at
/// (-+sin 20 deg, 0, cos 20 deg).
LightRig default_synth_rig();

AnnulusGeometry default_synth_geometry(std::uint32_t width, std::uint32_t height);

/// Writes PGM images and masks plus a manifest to `out_dir`. Attack samples
/// alternate between a dot-heavy pattern (tag "textured-regular") and a
/// dot-free high-amplitude pattern (tag "textured-irregular"); bona fide
/// samples are tagged "none" and clear-lens samples "clear".
DatasetManifest generate_corpus(const CorpusParams& params, const LightRig& rig,
                                const std::filesystem::path& out_dir);

}  // namespace irispad
