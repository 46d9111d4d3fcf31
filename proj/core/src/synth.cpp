#include "irispad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "irispad/imageio.hpp"
#include "irispad/rng.hpp"

namespace irispad {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Rng stream ids so the noise, dot, and albedo draws never collide.
constexpr std::uint64_t kStreamAlbedo = 1;
constexpr std::uint64_t kStreamBumpX = 2;
constexpr std::uint64_t kStreamBumpY = 3;
constexpr std::uint64_t kStreamDots = 4;
constexpr std::uint64_t kStreamNoise = 5;  // +light index

double hash01(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
  std::uint64_t h = seed;
  h = Rng::mix(h ^ (static_cast<std::uint64_t>(ix) * 0x9e3779b97f4a7c15ull));
  h = Rng::mix(h ^ (static_cast<std::uint64_t>(iy) * 0xc2b2ae3d27d4eb4full));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Seeded lattice value noise in [-1, 1], bilinear between integer corners.
double value_noise(std::uint64_t seed, double fx, double fy) {
  const double fxf = std::floor(fx), fyf = std::floor(fy);
  const auto ix = static_cast<std::int64_t>(fxf);
  const auto iy = static_cast<std::int64_t>(fyf);
  const double tx = fx - fxf, ty = fy - fyf;
  const double v00 = hash01(seed, ix, iy);
  const double v10 = hash01(seed, ix + 1, iy);
  const double v01 = hash01(seed, ix, iy + 1);
  const double v11 = hash01(seed, ix + 1, iy + 1);
  const double top = v00 + (v10 - v00) * tx;
  const double bottom = v01 + (v11 - v01) * tx;
  return 2.0 * (top + (bottom - top) * ty) - 1.0;
}

struct PolarCoord {
  bool in_annulus = false;
  double rho = 0;    // 0 at the pupil boundary, 1 at the iris boundary
  double theta = 0;  // [0, 2 pi) around the pupil center
};

PolarCoord polar(const AnnulusGeometry& g, double px, double py) {
  PolarCoord out;
  const double di2 = (px - g.iris_cx) * (px - g.iris_cx) + (py - g.iris_cy) * (py - g.iris_cy);
  const double vx = px - g.pupil_cx, vy = py - g.pupil_cy;
  const double dp2 = vx * vx + vy * vy;
  if (di2 > g.iris_r * g.iris_r || dp2 <= g.pupil_r * g.pupil_r) return out;

  const double dist = std::sqrt(dp2);
  const double dx = vx / dist, dy = vy / dist;
  const double ux = g.pupil_cx - g.iris_cx, uy = g.pupil_cy - g.iris_cy;
  const double ud = ux * dx + uy * dy;
  const double s = -ud + std::sqrt(ud * ud - (ux * ux + uy * uy) + g.iris_r * g.iris_r);

  out.in_annulus = true;
  out.rho = (dist - g.pupil_r) / (s - g.pupil_r);
  out.theta = std::atan2(vy, vx);
  if (out.theta < 0) out.theta += kTwoPi;
  return out;
}

}  // namespace

bool AnnulusRegion::full() const {
  return rho_min == 0.0 && rho_max == 1.0 && theta_min == 0.0 && theta_max >= kTwoPi - 1e-12;
}

void SurfaceSpec::validate() const {
  if (bump_amplitude < 0 || rim_amplitude < 0)
    throw Error(ErrorCode::InvalidSpec, "amplitudes must be >= 0");
  if (bump_count < 1) throw Error(ErrorCode::InvalidSpec, "bump_count must be >= 1");
  if (opaque_dot_fraction < 0 || opaque_dot_fraction > 1)
    throw Error(ErrorCode::InvalidSpec, "opaque_dot_fraction must be in [0,1]");
  if (!(albedo_low > 0) || albedo_low > albedo_high || albedo_high > 1)
    throw Error(ErrorCode::InvalidSpec, "albedo range must satisfy 0 < low <= high <= 1");
  if (!(rim_width > 0) || rim_width > 1)
    throw Error(ErrorCode::InvalidSpec, "rim_width must be in (0,1]");
  if (region.rho_min < 0 || region.rho_max > 1 || region.rho_min >= region.rho_max ||
      region.theta_min < 0 || region.theta_max > kTwoPi + 1e-12 ||
      region.theta_min >= region.theta_max)
    throw Error(ErrorCode::InvalidSpec, "bad perturbation region");
  const double nb = norm(base_normal);
  if (!(nb > 1e-6) || !std::isfinite(nb))
    throw Error(ErrorCode::InvalidSpec, "base_normal must be nonzero");
  if (kind == SurfaceKind::FlatIris) {
    if (bump_amplitude > 0.05)
      throw Error(ErrorCode::InvalidSpec, "flat iris perturbation must stay <= 0.05");
    if (opaque_dot_fraction != 0)
      throw Error(ErrorCode::InvalidSpec, "flat iris cannot carry opaque dots");
  }
}

SurfaceSpec SurfaceSpec::flat_iris(std::uint64_t seed) {
  SurfaceSpec spec;
  spec.kind = SurfaceKind::FlatIris;
  spec.texture_seed = seed;
  spec.bump_amplitude = 0.02;
  spec.bump_count = 6;
  return spec;
}

SurfaceSpec SurfaceSpec::bumpy_lens(std::uint64_t seed) {
  SurfaceSpec spec;
  spec.kind = SurfaceKind::BumpyLens;
  spec.texture_seed = seed;
  spec.bump_amplitude = 0.5;
  spec.bump_count = 12;
  spec.opaque_dot_fraction = 0.06;
  return spec;
}

SurfaceSpec SurfaceSpec::clear_lens(std::uint64_t seed) {
  SurfaceSpec spec = flat_iris(seed);
  spec.rim_amplitude = 0.15;
  spec.rim_width = 0.12;
  return spec;
}

LightRig default_synth_rig() {
  const double s = std::sin(20.0 * std::numbers::pi / 180.0);
  const double c = std::cos(20.0 * std::numbers::pi / 180.0);
  return LightRig::from_directions({Vec3{-s, 0, c}, Vec3{s, 0, c}});
}

AnnulusGeometry default_synth_geometry(std::uint32_t width, std::uint32_t height) {
  const double m = std::min(width, height);
  AnnulusGeometry geom;
  geom.pupil_cx = geom.iris_cx = width / 2.0;
  geom.pupil_cy = geom.iris_cy = height / 2.0;
  geom.pupil_r = 0.15 * m;
  geom.iris_r = 0.45 * m;
  return geom;
}

SynthSample generate(const SurfaceSpec& spec, const AnnulusGeometry& geometry,
                     const LightRig& rig, std::uint32_t width, std::uint32_t height,
                     double noise_sigma) {
  spec.validate();
  geometry.validate();
  if (noise_sigma < 0) throw Error(ErrorCode::InvalidSpec, "noise_sigma must be >= 0");
  const std::size_t n_pixels = static_cast<std::size_t>(width) * height;
  const Vec3 base = normalized(spec.base_normal);

  // Surface normals plus a smooth per-pixel albedo texture.
  std::vector<Vec3> normals(n_pixels, base);
  std::vector<double> albedo(n_pixels, spec.albedo_high);
  const double cell = static_cast<double>(width) / spec.bump_count;
  const std::uint64_t seed_albedo = Rng(spec.texture_seed, kStreamAlbedo).next_u64();
  const std::uint64_t seed_bx = Rng(spec.texture_seed, kStreamBumpX).next_u64();
  const std::uint64_t seed_by = Rng(spec.texture_seed, kStreamBumpY).next_u64();

  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * width + x;
      const double px = x + 0.5, py = y + 0.5;
      const PolarCoord pc = polar(geometry, px, py);

      const double a01 = 0.5 * (value_noise(seed_albedo, px / (2.0 * cell), py / (2.0 * cell)) + 1.0);
      albedo[p] = spec.albedo_low + (spec.albedo_high - spec.albedo_low) * a01;

      if (!pc.in_annulus) continue;
      Vec3 n = base;
      if (spec.bump_amplitude > 0 &&
          (spec.region.full() || spec.region.contains(pc.rho, pc.theta))) {
        const double gx = value_noise(seed_bx, px / cell, py / cell);
        const double gy = value_noise(seed_by, px / cell, py / cell);
        n = add(n, Vec3{spec.bump_amplitude * gx, spec.bump_amplitude * gy, 0});
      }
      if (spec.rim_amplitude > 0 && pc.rho >= 1.0 - spec.rim_width) {
        // One-sided radial ridge along the outer boundary: the lens edge.
        const double u = (pc.rho - (1.0 - spec.rim_width)) / spec.rim_width;
        const double ridge = spec.rim_amplitude * std::sin(std::numbers::pi * u);
        n = add(n, Vec3{ridge * std::cos(pc.theta), ridge * std::sin(pc.theta), 0});
      }
      normals[p] = normalized(n);
    }
  }

  // Opaque print dots: zero albedo at the dot, plus a shadow disc offset
  // along the projected light direction that darkens exactly one image.
  std::vector<std::vector<double>> shadow(rig.k(), std::vector<double>(n_pixels, 1.0));
  if (spec.opaque_dot_fraction > 0) {
    const double dot_r = std::max(2.0, 0.02 * std::min(width, height));
    const double annulus_area =
        std::numbers::pi * (geometry.iris_r * geometry.iris_r - geometry.pupil_r * geometry.pupil_r);
    const auto n_dots = static_cast<std::size_t>(
        std::lround(spec.opaque_dot_fraction * annulus_area / (std::numbers::pi * dot_r * dot_r)));
    Rng dots(spec.texture_seed, kStreamDots);
    for (std::size_t d = 0; d < n_dots; ++d) {
      double cx = 0, cy = 0;
      for (;;) {
        cx = dots.uniform(geometry.iris_cx - geometry.iris_r, geometry.iris_cx + geometry.iris_r);
        cy = dots.uniform(geometry.iris_cy - geometry.iris_r, geometry.iris_cy + geometry.iris_r);
        if (polar(geometry, cx, cy).in_annulus) break;
      }
      const std::size_t image_index = d % rig.k();
      const Vec3& light = rig.directions()[image_index];
      double lx = light[0], ly = light[1];
      const double ln = std::hypot(lx, ly);
      if (ln > 1e-9) {
        lx /= ln;
        ly /= ln;
      } else {
        lx = 1;
        ly = 0;
      }
      const double sx = cx + 2.0 * dot_r * lx, sy = cy + 2.0 * dot_r * ly;
      const double shadow_r = 1.2 * dot_r;

      const auto x0 = static_cast<std::int64_t>(std::floor(std::min(cx, sx) - shadow_r - 1));
      const auto x1 = static_cast<std::int64_t>(std::ceil(std::max(cx, sx) + shadow_r + 1));
      const auto y0 = static_cast<std::int64_t>(std::floor(std::min(cy, sy) - shadow_r - 1));
      const auto y1 = static_cast<std::int64_t>(std::ceil(std::max(cy, sy) + shadow_r + 1));
      for (std::int64_t yy = std::max<std::int64_t>(0, y0);
           yy < std::min<std::int64_t>(height, y1); ++yy) {
        for (std::int64_t xx = std::max<std::int64_t>(0, x0);
             xx < std::min<std::int64_t>(width, x1); ++xx) {
          const double qx = xx + 0.5, qy = yy + 0.5;
          const std::size_t p = static_cast<std::size_t>(yy) * width + static_cast<std::size_t>(xx);
          if ((qx - cx) * (qx - cx) + (qy - cy) * (qy - cy) <= dot_r * dot_r) albedo[p] = 0.0;
          if ((qx - sx) * (qx - sx) + (qy - sy) * (qy - sy) <= shadow_r * shadow_r)
            shadow[image_index][p] = std::min(shadow[image_index][p], 0.15);
        }
      }
    }
  }

  // Lambertian render per light, plus optional Gaussian noise, 8-bit output.
  std::size_t clamp_events = 0;
  std::vector<GrayImage> rendered;
  rendered.reserve(rig.k());
  for (std::size_t d = 0; d < rig.k(); ++d) {
    Rng noise(spec.texture_seed, kStreamNoise + d);
    GrayImage img(width, height);
    const Vec3& light = rig.directions()[d];
    for (std::size_t p = 0; p < n_pixels; ++p) {
      const double cosine = dot(light, normals[p]);
      if (cosine < 0 && albedo[p] > 0) ++clamp_events;
      double v = albedo[p] * std::max(0.0, cosine) * shadow[d][p];
      if (noise_sigma > 0) v += noise_sigma * noise.normal();
      if (v < 0 || v > 1) {
        ++clamp_events;
        v = std::clamp(v, 0.0, 1.0);
      }
      img.pixels[p] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    rendered.push_back(std::move(img));
  }

  SynthSample sample;
  sample.geometry = geometry;
  sample.clamp_events = clamp_events;

  BinaryMask mask = annulus_mask(geometry, width, height);
  const Label label = spec.kind == SurfaceKind::BumpyLens ? Label::Attack : Label::BonaFide;
  if (rig.k() == 2) {
    sample.pair = ImagePair(std::move(rendered[0]), std::move(rendered[1]), mask, mask, label);
  } else {
    // Multi-light rigs keep the first two images in the pair container.
    sample.pair = ImagePair(rendered[0], rendered[1], mask, mask, label);
  }

  sample.truth_normals.width = width;
  sample.truth_normals.height = height;
  sample.truth_normals.normals = std::move(normals);
  sample.truth_normals.raw.resize(n_pixels);
  for (std::size_t p = 0; p < n_pixels; ++p)
    sample.truth_normals.raw[p] = scale(sample.truth_normals.normals[p], albedo[p]);
  sample.truth_normals.valid = BinaryMask(width, height, true);
  return sample;
}

namespace {

std::string zero_pad(std::size_t v, int digits) {
  std::string s = std::to_string(v);
  while (static_cast<int>(s.size()) < digits) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

DatasetManifest generate_corpus(const CorpusParams& params, const LightRig& rig,
                                const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string());

  const AnnulusGeometry geom = default_synth_geometry(params.width, params.height);
  DatasetManifest manifest;
  Rng seeds(params.seed, 9000);

  const auto emit = [&](const std::string& id, const SurfaceSpec& spec, Label label,
                        const std::string& tag) {
    const SynthSample sample = generate(spec, geom, rig, params.width, params.height,
                                        params.noise_sigma);
    ManifestEntry entry;
    entry.sample_id = id;
    entry.left = out_dir / (id + "_left.pgm");
    entry.right = out_dir / (id + "_right.pgm");
    entry.mask_left = entry.mask_right = out_dir / (id + "_mask.pgm");
    save_gray(sample.pair.left, entry.left);
    save_gray(sample.pair.right, entry.right);
    save_mask(sample.pair.mask_left, entry.mask_left);
    entry.annulus = geom;
    entry.label = label;
    entry.tags.push_back(tag);
    manifest.entries.push_back(std::move(entry));
  };

  for (std::size_t i = 0; i < params.n_bonafide; ++i) {
    SurfaceSpec spec = SurfaceSpec::flat_iris(seeds.next_u64());
    spec.bump_amplitude = params.flat_amplitude;
    emit("bona-" + zero_pad(i, 4), spec, Label::BonaFide, "none");
  }
  for (std::size_t i = 0; i < params.n_attack; ++i) {
    SurfaceSpec spec = SurfaceSpec::bumpy_lens(seeds.next_u64());
    spec.bump_amplitude = params.bump_amplitude;
    spec.opaque_dot_fraction = params.dot_fraction;
    std::string tag = "textured-regular";
    if (i % 2 == 1) {
      // Dot-free irregular pattern: finer, stronger relief instead of print dots.
      spec.opaque_dot_fraction = 0;
      spec.bump_amplitude = 1.6 * params.bump_amplitude;
      spec.bump_count = 20;
      tag = "textured-irregular";
    }
    emit("att-" + zero_pad(i, 4), spec, Label::Attack, tag);
  }
  for (std::size_t i = 0; i < params.n_clear; ++i) {
    emit("clear-" + zero_pad(i, 4), SurfaceSpec::clear_lens(seeds.next_u64()), Label::BonaFide,
         "clear");
  }

  save_manifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

}  // namespace irispad
