#include <benchmark/benchmark.h>

#include <utility>
#include <vector>

#include "irispad/eval.hpp"
#include "irispad/rng.hpp"
#include "irispad/roi.hpp"
#include "irispad/score.hpp"
#include "irispad/stereo.hpp"
#include "irispad/synth.hpp"

namespace {

using namespace irispad;

SynthSample make_sample(std::uint32_t size, bool attack) {
  const SurfaceSpec spec = attack ? SurfaceSpec::bumpy_lens(7) : SurfaceSpec::flat_iris(7);
  return generate(spec, default_synth_geometry(size, size), default_synth_rig(), size, size, 0.0);
}

void BM_EstimateNormals(benchmark::State& state) {
  const auto size = static_cast<std::uint32_t>(state.range(0));
  const SynthSample sample = make_sample(size, false);
  const LightRig rig = default_synth_rig();
  for (auto _ : state) {
    NormalField field = estimate_normals(sample.pair, rig);
    benchmark::DoNotOptimize(field.normals.data());
  }
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_EstimateNormals)->Arg(160)->Arg(320)->Arg(640);

void BM_BaseScore(benchmark::State& state) {
  const auto size = static_cast<std::uint32_t>(state.range(0));
  const SynthSample sample = make_sample(size, true);
  const NormalField field = estimate_normals(sample.pair, default_synth_rig());
  const BinaryMask mask = combined_mask(sample.pair);
  for (auto _ : state) {
    PadScore score = base_score(field, mask);
    benchmark::DoNotOptimize(score.value);
  }
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_BaseScore)->Arg(160)->Arg(640);

void BM_WeightedScore(benchmark::State& state) {
  const auto size = static_cast<std::uint32_t>(state.range(0));
  const SynthSample sample = make_sample(size, true);
  const NormalField field = estimate_normals(sample.pair, default_synth_rig());
  const BinaryMask mask = combined_mask(sample.pair);
  const SectorGrid grid(sample.geometry, SectorGridParams{5, 15});
  std::vector<double> weights(static_cast<std::size_t>(grid.params.sector_count()), 0.0);
  Rng rng(11);
  for (auto& w : weights) w = rng.uniform();
  for (auto _ : state) {
    PadScore score = weighted_score(field, mask, grid, weights);
    benchmark::DoNotOptimize(score.value);
  }
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_WeightedScore)->Arg(160)->Arg(640);

void BM_RocAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(23);
  std::vector<std::pair<double, bool>> scores;
  scores.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) scores.emplace_back(rng.normal() + 1.0, true);
  for (std::size_t i = 0; i < n; ++i) scores.emplace_back(rng.normal(), false);
  for (auto _ : state) {
    auto [points, auc] = roc_auc(scores);
    benchmark::DoNotOptimize(auc);
    benchmark::DoNotOptimize(points.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * n);
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);

void BM_SynthRender(benchmark::State& state) {
  const auto size = static_cast<std::uint32_t>(state.range(0));
  const LightRig rig = default_synth_rig();
  const AnnulusGeometry geometry = default_synth_geometry(size, size);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    SynthSample sample = generate(SurfaceSpec::bumpy_lens(seed++), geometry, rig, size, size, 0.0);
    benchmark::DoNotOptimize(sample.pair.left.pixels.data());
  }
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_SynthRender)->Arg(160)->Arg(320);

}  // namespace

BENCHMARK_MAIN();
