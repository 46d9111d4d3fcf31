#include <cmath>
#include <map>

#include "doctest.h"
#include "irispad/imageio.hpp"
#include "irispad/rng.hpp"
#include "irispad/roi.hpp"
#include "support/oracles.hpp"

using namespace irispad;
using oracles::TempDir;

namespace {

AnnulusGeometry random_geometry(Rng& rng, double extent) {
  for (;;) {
    AnnulusGeometry g;
    g.iris_cx = extent * rng.uniform(0.4, 0.6);
    g.iris_cy = extent * rng.uniform(0.4, 0.6);
    g.iris_r = extent * rng.uniform(0.25, 0.45);
    g.pupil_r = g.iris_r * rng.uniform(0.15, 0.4);
    const double wiggle = (g.iris_r - g.pupil_r) * 0.4;
    g.pupil_cx = g.iris_cx + rng.uniform(-wiggle, wiggle);
    g.pupil_cy = g.iris_cy + rng.uniform(-wiggle, wiggle);
    try {
      g.validate();
      return g;
    } catch (const Error&) {
      continue;
    }
  }
}

}  // namespace

TEST_SUITE("roi") {

TEST_CASE("geometry validation") {
  AnnulusGeometry g{10, 10, 3, 10, 10, 8};
  CHECK_NOTHROW(g.validate());

  SUBCASE("zero pupil radius") {
    g.pupil_r = 0;
    CHECK_THROWS_AS(g.validate(), Error);
  }
  SUBCASE("pupil not smaller than iris") {
    g.pupil_r = 8;
    CHECK_THROWS_AS(g.validate(), Error);
  }
  SUBCASE("pupil circle leaking outside the iris circle") {
    g.pupil_cx = 16;  // distance 6 + pupil_r 3 > iris_r 8
    CHECK_THROWS_AS(g.validate(), Error);
  }
  SUBCASE("off-center but contained is fine") {
    g.pupil_cx = 12;  // distance 2 + 3 <= 8
    CHECK_NOTHROW(g.validate());
  }
}

TEST_CASE("combined_mask is commutative, idempotent, and subset of inputs") {
  Rng rng(301);
  BinaryMask a(20, 15), b(20, 15);
  for (std::uint32_t y = 0; y < 15; ++y)
    for (std::uint32_t x = 0; x < 20; ++x) {
      a.set(x, y, rng.uniform() < 0.6);
      b.set(x, y, rng.uniform() < 0.6);
    }
  const BinaryMask ab = combined_mask(a, b);
  const BinaryMask ba = combined_mask(b, a);
  const BinaryMask aa = combined_mask(a, a);
  CHECK(ab.bits == ba.bits);
  CHECK(aa.bits == a.bits);
  for (std::uint32_t y = 0; y < 15; ++y)
    for (std::uint32_t x = 0; x < 20; ++x) {
      if (ab.at(x, y)) {
        CHECK(a.at(x, y));
        CHECK(b.at(x, y));
      }
      CHECK(ab.at(x, y) == (a.at(x, y) && b.at(x, y)));
    }
  CHECK_THROWS_AS(combined_mask(a, BinaryMask(5, 5)), Error);
}

TEST_CASE("annulus_mask matches the pixel-center predicate") {
  Rng rng(302);
  for (int trial = 0; trial < 10; ++trial) {
    const AnnulusGeometry g = random_geometry(rng, 48);
    const BinaryMask mask = annulus_mask(g, 48, 48);
    for (std::uint32_t y = 0; y < 48; ++y)
      for (std::uint32_t x = 0; x < 48; ++x) {
        const double cx = x + 0.5, cy = y + 0.5;
        const double di = std::hypot(cx - g.iris_cx, cy - g.iris_cy);
        const double dp = std::hypot(cx - g.pupil_cx, cy - g.pupil_cy);
        const bool inside = di <= g.iris_r && dp > g.pupil_r;
        CHECK(mask.at(x, y) == inside);
      }
  }
}

TEST_CASE("annulus_mask monotone in iris radius") {
  Rng rng(303);
  AnnulusGeometry g = random_geometry(rng, 64);
  const BinaryMask small = annulus_mask(g, 64, 64);
  g.iris_r *= 1.15;
  const BinaryMask big = annulus_mask(g, 64, 64);
  for (std::size_t i = 0; i < small.bits.size(); ++i)
    if (small.bits[i]) CHECK(big.bits[i]);
}

TEST_CASE("sector tiling partitions the annulus") {
  Rng rng(304);
  for (const auto [r, t] : {std::pair{4, 10}, std::pair{5, 15}, std::pair{1, 1}}) {
    const AnnulusGeometry g = random_geometry(rng, 56);
    const SectorGrid grid(g, SectorGridParams{r, t});
    const BinaryMask annulus = annulus_mask(g, 56, 56);
    std::map<int, std::size_t> population;
    for (std::uint32_t y = 0; y < 56; ++y)
      for (std::uint32_t x = 0; x < 56; ++x) {
        const auto s = sector_index(grid, x, y);
        // defined exactly on the annulus
        CHECK(s.has_value() == annulus.at(x, y));
        if (s) {
          CHECK(s->first >= 0);
          CHECK(s->first < r);
          CHECK(s->second >= 0);
          CHECK(s->second < t);
          population[s->first * t + s->second] += 1;
        }
      }
    std::size_t total = 0;
    for (const auto& [id, n] : population) total += n;
    CHECK(total == annulus.popcount());
  }
}

TEST_CASE("concentric circles give analytic sector indices") {
  AnnulusGeometry g{32, 32, 8, 32, 32, 24};
  const SectorGrid grid(g, SectorGridParams{4, 8});
  // along +x from the pupil center: rho = (dist - 8) / (24 - 8)
  // x=45, y=32: pixel center (45.5, 32.5), dist ~ 13.5 -> rho ~ 0.34 -> ring 1;
  // theta just past 0 (y grows downward) -> first angular bin
  auto s = sector_index(grid, 45, 32);
  REQUIRE(s.has_value());
  CHECK(s->first == 1);
  CHECK(s->second == 0);

  // just inside the iris boundary: ring 3
  s = sector_index(grid, 55, 32);
  REQUIRE(s.has_value());
  CHECK(s->first == 3);

  // pixel center above the +x axis: theta slightly below 2*pi, last bin
  s = sector_index(grid, 45, 31);
  REQUIRE(s.has_value());
  CHECK(s->second == 7);

  CHECK_FALSE(sector_index(grid, 32, 32).has_value());  // inside pupil
  CHECK_FALSE(sector_index(grid, 0, 0).has_value());    // outside iris
}

TEST_CASE("rubber-sheet radial coordinate interpolates between boundaries") {
  // off-center pupil: the ring boundary must follow the interpolated radius,
  // not a fixed circle around either center
  AnnulusGeometry g{26, 32, 6, 32, 32, 26};
  const SectorGrid grid(g, SectorGridParams{2, 1});
  // Along +x from the pupil center (26, 32.5->y=32 center row): pupil edge at
  // x = 32, iris edge at 32 + sqrt(26^2 - 0.25) ~ 57.99. Midpoint ~ 45.
  auto lo = sector_index(grid, 38, 32);
  auto hi = sector_index(grid, 52, 32);
  REQUIRE(lo.has_value());
  REQUIRE(hi.has_value());
  CHECK(lo->first == 0);
  CHECK(hi->first == 1);
}

TEST_CASE("sector map matches per-pixel queries and exports") {
  TempDir tmp("sectors");
  Rng rng(305);
  const AnnulusGeometry g = random_geometry(rng, 40);
  const SectorGrid grid(g, SectorGridParams{3, 7});
  const SectorMap map = build_sector_map(grid, 40, 40);
  REQUIRE(map.width == 40);
  REQUIRE(map.height == 40);
  for (std::uint32_t y = 0; y < 40; ++y)
    for (std::uint32_t x = 0; x < 40; ++x) {
      const auto s = sector_index(grid, x, y);
      const std::int32_t id = map.ids[y * 40 + x];
      if (s)
        CHECK(id == s->first * 7 + s->second);
      else
        CHECK(id == -1);
    }
  save_sector_map(map, tmp.file("map.pgm"));  // 16-bit, id + 1
  CHECK(std::filesystem::file_size(tmp.file("map.pgm")) > 15 + 2 * 40 * 40 - 1);
}

TEST_CASE("grid construction validates parameters") {
  const AnnulusGeometry g{10, 10, 3, 10, 10, 8};
  CHECK_THROWS_AS(SectorGrid(g, SectorGridParams{0, 5}), Error);
  CHECK_THROWS_AS(SectorGrid(g, SectorGridParams{4, 0}), Error);
  CHECK_THROWS_AS(SectorGrid(AnnulusGeometry{10, 10, 9, 10, 10, 8}, SectorGridParams{2, 2}),
                  Error);
}

}  // TEST_SUITE
