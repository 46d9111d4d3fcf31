#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "doctest.h"
#include "irispad/imageio.hpp"
#include "irispad/score.hpp"
#include "irispad/stereo.hpp"
#include "irispad/synth.hpp"
#include "support/oracles.hpp"

using namespace irispad;
using oracles::TempDir;

TEST_SUITE("synth") {

TEST_CASE("spec validation catches contradictions") {
  SurfaceSpec flat = SurfaceSpec::flat_iris(1);
  CHECK_NOTHROW(flat.validate());

  SUBCASE("flat iris with dots") {
    flat.opaque_dot_fraction = 0.05;
    CHECK_THROWS_AS(flat.validate(), Error);
  }
  SUBCASE("flat iris with attack-scale bumps") {
    flat.bump_amplitude = 0.4;
    CHECK_THROWS_AS(flat.validate(), Error);
  }
  SUBCASE("empty albedo range") {
    flat.albedo_low = 0.9;
    flat.albedo_high = 0.8;
    CHECK_THROWS_AS(flat.validate(), Error);
  }
  SUBCASE("negative values") {
    SurfaceSpec bumpy = SurfaceSpec::bumpy_lens(1);
    bumpy.bump_amplitude = -1;
    CHECK_THROWS_AS(bumpy.validate(), Error);
  }
}

TEST_CASE("generation is deterministic per seed and differs across seeds") {
  const LightRig rig = default_synth_rig();
  const AnnulusGeometry geom = default_synth_geometry(64, 64);
  const SynthSample a = generate(SurfaceSpec::bumpy_lens(5), geom, rig, 64, 64, 0.01);
  const SynthSample b = generate(SurfaceSpec::bumpy_lens(5), geom, rig, 64, 64, 0.01);
  const SynthSample c = generate(SurfaceSpec::bumpy_lens(6), geom, rig, 64, 64, 0.01);
  CHECK(a.pair.left.pixels == b.pair.left.pixels);
  CHECK(a.pair.right.pixels == b.pair.right.pixels);
  CHECK(a.pair.left.pixels != c.pair.left.pixels);
}

TEST_CASE("rendered intensities live in range and clamps are counted") {
  const LightRig rig = default_synth_rig();
  const AnnulusGeometry geom = default_synth_geometry(64, 64);
  // heavy noise forces clamping
  const SynthSample noisy = generate(SurfaceSpec::flat_iris(3), geom, rig, 64, 64, 0.5);
  CHECK(noisy.clamp_events > 0);
  // noise-free flat surface renders without clamping
  const SynthSample clean = generate(SurfaceSpec::flat_iris(3), geom, rig, 64, 64, 0.0);
  CHECK(clean.clamp_events == 0);
}

TEST_CASE("truth normals are unit length and invalid nowhere") {
  const LightRig rig = default_synth_rig();
  const AnnulusGeometry geom = default_synth_geometry(48, 48);
  const SynthSample s = generate(SurfaceSpec::bumpy_lens(9), geom, rig, 48, 48, 0.0);
  REQUIRE(s.truth_normals.width == 48);
  for (std::uint32_t y = 0; y < 48; ++y)
    for (std::uint32_t x = 0; x < 48; ++x) {
      CHECK(s.truth_normals.valid.at(x, y));
      CHECK(norm(s.truth_normals.normal_at(x, y)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("flat surfaces render brighter pixel agreement than bumpy ones") {
  // forward consistency: rendering a noise-free flat sample and re-solving
  // recovers normals close to truth inside the annulus
  const LightRig rig = default_synth_rig();
  const std::uint32_t size = 64;
  const AnnulusGeometry geom = default_synth_geometry(size, size);
  const SynthSample s = generate(SurfaceSpec::flat_iris(21), geom, rig, size, size, 0.0);
  const NormalField solved = estimate_normals(s.pair, rig);
  const BinaryMask annulus = annulus_mask(geom, size, size);

  double worst = 0;
  std::size_t checked = 0;
  for (std::uint32_t y = 0; y < size; ++y)
    for (std::uint32_t x = 0; x < size; ++x) {
      if (!annulus.at(x, y) || !solved.valid.at(x, y)) continue;
      // compare the in-span projections (k=2 recovers only those)
      const Vec3& truth = s.truth_normals.normal_at(x, y);
      const Vec3 null_dir = normalized(cross(rig.directions()[0], rig.directions()[1]));
      const Vec3 truth_proj = normalized(sub(truth, scale(null_dir, dot(truth, null_dir))));
      const Vec3 solved_proj = normalized(
          sub(solved.normal_at(x, y), scale(null_dir, dot(solved.normal_at(x, y), null_dir))));
      const double cosang = std::clamp(dot(truth_proj, solved_proj), -1.0, 1.0);
      worst = std::max(worst, std::acos(cosang));
      ++checked;
    }
  CHECK(checked > 500);
  CHECK(worst < 0.05);  // 8-bit quantization only
}

TEST_CASE("bumpy attacks score far above flat bona fide surfaces") {
  const LightRig rig = default_synth_rig();
  const std::uint32_t size = 96;
  const AnnulusGeometry geom = default_synth_geometry(size, size);
  const BinaryMask annulus = annulus_mask(geom, size, size);

  const SynthSample flat = generate(SurfaceSpec::flat_iris(31), geom, rig, size, size, 0.0);
  const SynthSample bumpy = generate(SurfaceSpec::bumpy_lens(31), geom, rig, size, size, 0.0);
  CHECK(flat.pair.label == Label::BonaFide);
  CHECK(bumpy.pair.label == Label::Attack);

  const double flat_score =
      base_score(estimate_normals(flat.pair, rig), combined_mask(combined_mask(flat.pair), annulus)).value;
  const double bumpy_score =
      base_score(estimate_normals(bumpy.pair, rig),
                 combined_mask(combined_mask(bumpy.pair), annulus)).value;
  CHECK(bumpy_score > 50 * flat_score);
}

TEST_CASE("opaque dots shadow exactly one image of the pair") {
  SurfaceSpec spec = SurfaceSpec::bumpy_lens(17);
  spec.opaque_dot_fraction = 0.10;
  const LightRig rig = default_synth_rig();
  const std::uint32_t size = 96;
  const AnnulusGeometry geom = default_synth_geometry(size, size);
  const SynthSample dotted = generate(spec, geom, rig, size, size, 0.0);

  SurfaceSpec no_dots = spec;
  no_dots.opaque_dot_fraction = 0.0;
  const SynthSample plain = generate(no_dots, geom, rig, size, size, 0.0);

  // dots darken both images at the dot itself (zero albedo), but the
  // companion shadow darkens only one image; count pixels where exactly one
  // side changed
  std::size_t asymmetric = 0, dark_both = 0;
  for (std::size_t i = 0; i < dotted.pair.left.pixels.size(); ++i) {
    const bool left_changed = dotted.pair.left.pixels[i] + 6 < plain.pair.left.pixels[i];
    const bool right_changed = dotted.pair.right.pixels[i] + 6 < plain.pair.right.pixels[i];
    if (left_changed != right_changed) ++asymmetric;
    if (left_changed && right_changed) ++dark_both;
  }
  CHECK(asymmetric > 20);
  CHECK(dark_both > 20);
}

TEST_CASE("increasing bump amplitude never decreases the mean attack score") {
  const LightRig rig = default_synth_rig();
  const std::uint32_t size = 64;
  const AnnulusGeometry geom = default_synth_geometry(size, size);
  const BinaryMask annulus = annulus_mask(geom, size, size);

  double prev_mean = -1;
  for (double amp : {0.1, 0.3, 0.6}) {
    double acc = 0;
    for (std::uint64_t i = 0; i < 30; ++i) {
      SurfaceSpec spec = SurfaceSpec::bumpy_lens(1000 + i);  // seeds fixed across levels
      spec.bump_amplitude = amp;
      spec.opaque_dot_fraction = 0;
      const SynthSample s = generate(spec, geom, rig, size, size, 0.0);
      acc += base_score(estimate_normals(s.pair, rig),
                        combined_mask(combined_mask(s.pair), annulus)).value;
    }
    const double mean = acc / 30;
    CHECK(mean >= prev_mean);
    prev_mean = mean;
  }
}

TEST_CASE("clear-lens rim sits between flat and bumpy in score") {
  const LightRig rig = default_synth_rig();
  const std::uint32_t size = 96;
  const AnnulusGeometry geom = default_synth_geometry(size, size);
  const BinaryMask annulus = annulus_mask(geom, size, size);
  const auto score_of = [&](const SurfaceSpec& spec) {
    const SynthSample s = generate(spec, geom, rig, size, size, 0.0);
    return base_score(estimate_normals(s.pair, rig),
                      combined_mask(combined_mask(s.pair), annulus)).value;
  };
  const double flat = score_of(SurfaceSpec::flat_iris(41));
  const double clear = score_of(SurfaceSpec::clear_lens(41));
  const double bumpy = score_of(SurfaceSpec::bumpy_lens(41));
  CHECK(clear > flat);
  CHECK(clear < bumpy);
}

TEST_CASE("generate_corpus writes a loadable, labeled, tagged manifest") {
  TempDir tmp("corpus");
  CorpusParams params;
  params.n_bonafide = 3;
  params.n_attack = 4;
  params.n_clear = 2;
  params.seed = 99;
  params.width = 64;
  params.height = 64;
  const LightRig rig = default_synth_rig();
  const DatasetManifest written = generate_corpus(params, rig, tmp.path());
  REQUIRE(written.size() == 9);

  const DatasetManifest loaded = load_manifest(tmp.file("manifest.csv"));
  REQUIRE(loaded.size() == 9);
  std::size_t bona = 0, attack = 0, clear = 0, regular = 0, irregular = 0;
  for (const auto& e : loaded.entries) {
    REQUIRE(e.annulus.has_value());
    if (e.label == Label::Attack) ++attack;
    for (const auto& tag : e.tags) {
      if (tag == "clear") ++clear;
      if (tag == "none") ++bona;
      if (tag == "textured-regular") ++regular;
      if (tag == "textured-irregular") ++irregular;
    }
    const ImagePair pair = loaded.load_pair(&e - loaded.entries.data());
    CHECK(pair.width() == 64);
  }
  CHECK(bona == 3);
  CHECK(attack == 4);
  CHECK(clear == 2);
  CHECK(regular == 2);  // attacks alternate
  CHECK(irregular == 2);

  // byte-identical regeneration
  TempDir tmp2("corpus2");
  generate_corpus(params, rig, tmp2.path());
  for (const auto& entry : std::filesystem::directory_iterator(tmp.path())) {
    const auto name = entry.path().filename();
    std::ifstream fa(entry.path(), std::ios::binary), fb(tmp2.path() / name, std::ios::binary);
    REQUIRE(fb.good());
    const std::string ba((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    const std::string bb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(ba == bb);
  }
}

TEST_CASE("default rig and geometry are sane") {
  const LightRig rig = default_synth_rig();
  REQUIRE(rig.k() == 2);
  CHECK(rig.directions()[0][0] < 0);
  CHECK(rig.directions()[1][0] > 0);
  for (const auto& d : rig.directions()) {
    CHECK(d[2] > 0.9);
    CHECK(norm(d) == doctest::Approx(1.0));
  }
  const AnnulusGeometry g = default_synth_geometry(200, 100);
  CHECK_NOTHROW(g.validate());
  CHECK(g.iris_r == doctest::Approx(0.45 * 100));
  CHECK(g.pupil_r == doctest::Approx(0.15 * 100));
}

TEST_CASE("invalid parameters are rejected") {
  const LightRig rig = default_synth_rig();
  const AnnulusGeometry geom = default_synth_geometry(32, 32);
  CHECK_THROWS_AS(generate(SurfaceSpec::flat_iris(1), geom, rig, 32, 32, -0.1), Error);
  AnnulusGeometry bad = geom;
  bad.pupil_r = bad.iris_r + 1;
  CHECK_THROWS_AS(generate(SurfaceSpec::flat_iris(1), bad, rig, 32, 32, 0.0), Error);
}

}  // TEST_SUITE
