#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "irispad/areas.hpp"
#include "irispad/eval.hpp"
#include "irispad/imageio.hpp"
#include "irispad/manifest.hpp"
#include "irispad/roi.hpp"
#include "irispad/score.hpp"
#include "irispad/stereo.hpp"
#include "irispad/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;   // some samples failed, run completed
constexpr int kExitConfig = 2;    // configuration or input error

namespace fs = std::filesystem;
using namespace irispad;

struct GlobalOpts {
  std::string rig_path;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string out_dir;
};

fs::path ensure_out_dir(const GlobalOpts& opts) {
  if (opts.out_dir.empty()) throw Error(ErrorCode::InvalidSpec, "--out is required");
  fs::path dir(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
  return dir;
}

LightRig load_rig_or_fail(const GlobalOpts& opts) {
  if (opts.rig_path.empty()) throw Error(ErrorCode::InvalidRig, "--rig is required");
  return load_rig(opts.rig_path);
}

// Timestamps live only here so every other output stays byte-identical
// under a fixed seed.
void write_run_log(const fs::path& out_dir, int argc, char** argv, const std::string& status) {
  std::ofstream log(out_dir / "run.log", std::ios::app);
  if (!log) return;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  log << stamp << " ";
  for (int i = 0; i < argc; ++i) log << (i ? " " : "") << argv[i];
  log << " -> " << status << "\n";
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& work) {
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs)
                              : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          work(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_list(const std::string& csv, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

// ---- normals ---------------------------------------------------------------

struct NormalsOpts {
  std::string left, right, mask_left, mask_right;
  bool components = false;
};

int cmd_normals(const GlobalOpts& global, const NormalsOpts& opts) {
  const LightRig rig = load_rig_or_fail(global);
  const fs::path out_dir = ensure_out_dir(global);

  GrayImage left = load_gray(opts.left);
  GrayImage right = load_gray(opts.right);
  BinaryMask ml = opts.mask_left.empty() ? BinaryMask(left.width, left.height, true)
                                         : load_mask(opts.mask_left);
  BinaryMask mr = opts.mask_right.empty() ? BinaryMask(right.width, right.height, true)
                                          : load_mask(opts.mask_right);
  const ImagePair pair(std::move(left), std::move(right), std::move(ml), std::move(mr));

  const NormalField field = estimate_normals(pair, rig);
  save_normal_field(field, out_dir / "normals.nrm");
  save_quiver_svg(field, out_dir / "quiver.svg");
  if (opts.components) save_component_pgms(field, out_dir, "normal");
  return kExitOk;
}

// ---- score -----------------------------------------------------------------

struct ScoreOpts {
  std::string manifest_path;
  std::string method = "base";
  std::string model_path;
  std::optional<double> threshold;
};

int cmd_score(const GlobalOpts& global, const ScoreOpts& opts) {
  const LightRig rig = load_rig_or_fail(global);
  const fs::path out_dir = ensure_out_dir(global);
  const DatasetManifest manifest = load_manifest(opts.manifest_path);
  const Method method = method_from_string(opts.method);

  AreaModel model;
  std::vector<double> weights;
  if (method == Method::WeightedAreas) {
    if (opts.model_path.empty())
      throw Error(ErrorCode::InvalidSpec, "--model is required for the weighted-areas method");
    model = load_area_model(opts.model_path);
    weights = model.weights();
  }

  struct Row {
    std::string score = "error";
    std::size_t n_pixels = 0;
    std::string decision;
    std::string warning;
  };
  std::vector<Row> rows(manifest.size());

  parallel_for(manifest.size(), global.jobs, [&](std::size_t i) {
    Row& row = rows[i];
    try {
      const ManifestEntry& entry = manifest.entries[i];
      const ImagePair pair = manifest.load_pair(i);
      const NormalField field = estimate_normals(pair, rig);
      BinaryMask mask = combined_mask(pair);
      if (entry.annulus)
        mask = combined_mask(mask, annulus_mask(*entry.annulus, pair.width(), pair.height()));

      PadScore score;
      if (method == Method::Base) {
        score = base_score(field, mask);
      } else {
        if (!entry.annulus)
          throw Error(ErrorCode::InvalidGeometry, "no annulus geometry in manifest row");
        score = weighted_score(field, mask, SectorGrid(*entry.annulus, model.params), weights);
      }
      row.score = format_double(score.value);
      row.n_pixels = score.n_pixels;
      if (opts.threshold) row.decision = score.value > *opts.threshold ? "attack" : "bonafide";
    } catch (const Error& e) {
      row.warning = e.what();
    }
  });

  std::ofstream csv(out_dir / "scores.csv", std::ios::binary);
  if (!csv) throw Error(ErrorCode::IoError, "cannot open scores.csv for writing");
  csv << "sample_id,variant,score,n_pixels,label";
  if (opts.threshold) csv << ",decision";
  csv << "\n";
  std::size_t warnings = 0;
  const char* variant = method == Method::Base ? "base" : "weighted";
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const Row& row = rows[i];
    const ManifestEntry& entry = manifest.entries[i];
    csv << entry.sample_id << ',' << variant << ',' << row.score << ',' << row.n_pixels << ','
        << to_string(entry.label);
    if (opts.threshold) csv << ',' << row.decision;
    csv << "\n";
    if (!row.warning.empty()) {
      ++warnings;
      std::cerr << "warning: sample '" << entry.sample_id << "': " << row.warning << "\n";
    }
  }
  if (warnings > 0) {
    std::cerr << warnings << " of " << manifest.size() << " samples failed\n";
    return kExitPartial;
  }
  return kExitOk;
}

// ---- train-areas -----------------------------------------------------------

struct TrainOpts {
  std::string manifest_path;
  bool signed_dprime = false;
  std::string radial = "4,5";
  std::string angular = "10,15";
};

int cmd_train_areas(const GlobalOpts& global, const TrainOpts& opts) {
  const LightRig rig = load_rig_or_fail(global);
  const fs::path out_dir = ensure_out_dir(global);
  const DatasetManifest manifest = load_manifest(opts.manifest_path);

  std::vector<int> radial, angular;
  for (const auto& s : split_list(opts.radial, ',')) radial.push_back(std::stoi(s));
  for (const auto& s : split_list(opts.angular, ',')) angular.push_back(std::stoi(s));

  struct Prepared {
    NormalField field;
    BinaryMask mask;
  };
  std::vector<Prepared> prepared(manifest.size());
  parallel_for(manifest.size(), global.jobs, [&](std::size_t i) {
    const ManifestEntry& entry = manifest.entries[i];
    if (!entry.annulus)
      throw Error(ErrorCode::InvalidGeometry,
                  "entry '" + entry.sample_id + "' has no annulus geometry");
    const ImagePair pair = manifest.load_pair(i);
    prepared[i].field = estimate_normals(pair, rig);
    prepared[i].mask = combined_mask(
        combined_mask(pair), annulus_mask(*entry.annulus, pair.width(), pair.height()));
  });

  std::vector<AreaSample> samples;
  samples.reserve(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i)
    samples.push_back(AreaSample{&prepared[i].field, &prepared[i].mask,
                                 *manifest.entries[i].annulus,
                                 manifest.entries[i].label == Label::Attack});

  irispad::TrainOptions train_options;
  train_options.signed_dprime = opts.signed_dprime;
  const AreaModel model = grid_search(samples, radial, angular, train_options);
  save_area_model(model, out_dir / "area_model.json");
  save_gray(significance_map(model), out_dir / "significance.pgm");
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalOpts {
  std::string manifest_path;
  std::string scenario = "mixed-crossval";
  std::string method = "base";
  int folds = 10;
  bool classic_kfold = false;
  bool signed_dprime = false;
  std::string train_tags, test_tags;
  std::string radial = "4,5";
  std::string angular = "10,15";
};

int cmd_eval(const GlobalOpts& global, const EvalOpts& opts) {
  const LightRig rig = load_rig_or_fail(global);
  const fs::path out_dir = ensure_out_dir(global);
  const DatasetManifest manifest = load_manifest(opts.manifest_path);

  SplitSpec spec;
  spec.scenario = scenario_from_string(opts.scenario);
  spec.folds = opts.folds;
  spec.seed = global.seed;
  spec.classic_kfold = opts.classic_kfold;
  spec.train_filter.any_of = split_list(opts.train_tags, ';');
  spec.test_filter.any_of = split_list(opts.test_tags, ';');

  RunOptions run;
  run.jobs = global.jobs;
  run.train.signed_dprime = opts.signed_dprime;
  run.radial_candidates.clear();
  run.angular_candidates.clear();
  for (const auto& s : split_list(opts.radial, ',')) run.radial_candidates.push_back(std::stoi(s));
  for (const auto& s : split_list(opts.angular, ',')) run.angular_candidates.push_back(std::stoi(s));

  const EvalReport report =
      run_scenario(manifest, spec, method_from_string(opts.method), rig, run);
  save_report_json(report, out_dir / "report.json");
  save_roc_csv(report.roc, out_dir / "roc.csv");
  save_roc_svg(report.roc, out_dir / "roc.svg");
  save_folds_csv(report.per_fold, out_dir / "folds.csv");
  return kExitOk;
}

// ---- synth -----------------------------------------------------------------

struct SynthOpts {
  std::size_t n_bonafide = 0;
  std::size_t n_attack = 0;
  std::size_t n_clear = 0;
  std::uint32_t width = 160, height = 160;
  double bump_amp = 0.5;
  double dot_frac = 0.06;
  double flat_amp = 0.02;
  double noise = 0.0;
};

int cmd_synth(const GlobalOpts& global, const SynthOpts& opts) {
  const fs::path out_dir = ensure_out_dir(global);
  const LightRig rig = global.rig_path.empty() ? default_synth_rig() : load_rig(global.rig_path);

  CorpusParams params;
  params.n_bonafide = opts.n_bonafide;
  params.n_attack = opts.n_attack;
  params.n_clear = opts.n_clear;
  params.width = opts.width;
  params.height = opts.height;
  params.bump_amplitude = opts.bump_amp;
  params.dot_fraction = opts.dot_frac;
  params.flat_amplitude = opts.flat_amp;
  params.noise_sigma = opts.noise;
  params.seed = global.seed;

  generate_corpus(params, rig, out_dir);
  save_rig(rig, out_dir / "rig.json");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"photometric-stereo iris presentation-attack detection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts global;
  app.add_option("--rig", global.rig_path, "light-rig JSON file");
  app.add_option("--seed", global.seed, "64-bit seed for all randomness");
  app.add_option("--jobs", global.jobs, "worker count (0 = hardware)");
  app.add_option("--out", global.out_dir, "output directory");

  NormalsOpts normals_opts;
  auto* normals = app.add_subcommand("normals", "estimate surface normals for one image pair");
  normals->add_option("--left", normals_opts.left, "left-illuminated image")->required();
  normals->add_option("--right", normals_opts.right, "right-illuminated image")->required();
  normals->add_option("--mask-left", normals_opts.mask_left, "left occlusion mask");
  normals->add_option("--mask-right", normals_opts.mask_right, "right occlusion mask");
  normals->add_flag("--components", normals_opts.components, "also write per-component PGMs");

  ScoreOpts score_opts;
  auto* score = app.add_subcommand("score", "compute PAD scores for a manifest");
  score->add_option("--manifest", score_opts.manifest_path, "dataset manifest CSV")->required();
  score->add_option("--method", score_opts.method, "base | weighted-areas");
  score->add_option("--model", score_opts.model_path, "area model JSON (weighted-areas)");
  double threshold_value = 0;
  auto* threshold_opt = score->add_option("--threshold", threshold_value,
                                          "decision threshold (score > t means attack)");

  TrainOpts train_opts;
  auto* train = app.add_subcommand("train-areas", "train the sector weight map");
  train->add_option("--manifest", train_opts.manifest_path, "dataset manifest CSV")->required();
  train->add_flag("--signed-dprime", train_opts.signed_dprime, "rank sectors by signed d'");
  train->add_option("--radial", train_opts.radial, "radial sector candidates, e.g. 4,5");
  train->add_option("--angular", train_opts.angular, "angular sector candidates, e.g. 10,15");

  EvalOpts eval_opts;
  auto* eval = app.add_subcommand("eval", "run an evaluation scenario");
  eval->add_option("--manifest", eval_opts.manifest_path, "dataset manifest CSV")->required();
  eval->add_option("--scenario", eval_opts.scenario,
                   "train-regular-test-irregular | train-irregular-test-regular | "
                   "mixed-crossval | clear-lens-test | custom");
  eval->add_option("--method", eval_opts.method, "base | weighted-areas");
  eval->add_option("--folds", eval_opts.folds, "fold count for cross-validation");
  eval->add_flag("--classic-kfold", eval_opts.classic_kfold,
                 "disjoint k-fold partition instead of bootstrap resampling");
  eval->add_flag("--signed-dprime", eval_opts.signed_dprime, "rank sectors by signed d'");
  eval->add_option("--train-tags", eval_opts.train_tags, "custom scenario: train tag list (;)");
  eval->add_option("--test-tags", eval_opts.test_tags, "custom scenario: test tag list (;)");
  eval->add_option("--radial", eval_opts.radial, "radial sector candidates");
  eval->add_option("--angular", eval_opts.angular, "angular sector candidates");

  SynthOpts synth_opts;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--n-bonafide", synth_opts.n_bonafide, "bona fide sample count");
  synth->add_option("--n-attack", synth_opts.n_attack, "attack sample count");
  synth->add_option("--n-clear", synth_opts.n_clear, "clear-lens sample count");
  synth->add_option("--width", synth_opts.width, "image width");
  synth->add_option("--height", synth_opts.height, "image height");
  synth->add_option("--bump-amp", synth_opts.bump_amp, "attack bump amplitude");
  synth->add_option("--dot-frac", synth_opts.dot_frac, "attack opaque-dot coverage");
  synth->add_option("--flat-amp", synth_opts.flat_amp, "bona fide texture amplitude");
  synth->add_option("--noise", synth_opts.noise, "Gaussian noise sigma on the [0,1] scale");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (threshold_opt->count() > 0) score_opts.threshold = threshold_value;

  int code = kExitConfig;
  std::string status = "error";
  try {
    if (normals->parsed()) code = cmd_normals(global, normals_opts);
    else if (score->parsed()) code = cmd_score(global, score_opts);
    else if (train->parsed()) code = cmd_train_areas(global, train_opts);
    else if (eval->parsed()) code = cmd_eval(global, eval_opts);
    else if (synth->parsed()) code = cmd_synth(global, synth_opts);
    status = code == kExitOk ? "ok" : (code == kExitPartial ? "partial" : "error");
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kExitConfig;
  }

  if (!global.out_dir.empty() && fs::is_directory(global.out_dir))
    write_run_log(global.out_dir, argc, argv, status);
  return code;
}
