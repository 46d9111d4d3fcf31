#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irispad/areas.hpp"
#include "irispad/manifest.hpp"
#include "irispad/stereo.hpp"

namespace irispad {

/// Train/test composition. Scenarios mirror the three experiment layouts:
/// (a) train on regular-pattern lenses, test on irregular; (b) the swap;
/// (c) mixed bootstrap cross-validation, optionally tested against
/// clear-lens wearers instead of lens-free eyes.
enum class Scenario {
  TrainRegularTestIrregular,
  TrainIrregularTestRegular,
  MixedCrossVal,
  ClearLensTest,
  Custom,
};

Scenario scenario_from_string(const std::string& s);
const char* to_string(Scenario s);

/// Matches entries carrying at least one of the listed tags (empty = all).
struct TagFilter {
  std::vector<std::string> any_of;
  bool matches(const ManifestEntry& entry) const;
};

struct SplitSpec {
  Scenario scenario = Scenario::MixedCrossVal;
  TagFilter train_filter;  // Custom scenario only
  TagFilter test_filter;   // Custom scenario only
  int folds = 10;
  std::uint64_t seed = 0;
  /// Escape hatch: partition attacks into `folds` disjoint chunks instead of
  /// bootstrap resampling.
  bool classic_kfold = false;
};

/// One fold's sample_id composition. Train is a multiset (bootstrap draws
/// repeat ids); train and test are disjoint by sample_id.
struct FoldSplit {
  std::vector<std::size_t> train;  // manifest entry indices, repeats allowed
  std::vector<std::size_t> test;
};

/// Builds the fold splits for a manifest without scoring anything.
std::vector<FoldSplit> build_splits(const DatasetManifest& manifest, const SplitSpec& spec);

struct RocPoint {
  double fpr = 0;        // BPCER at this threshold
  double tpr = 0;        // 1 - APCER
  double threshold = 0;  // decision rule: score > threshold => attack
};

/// ROC over all distinct thresholds, attack-positive convention, ties
/// grouped into single steps; AUC by the trapezoidal rule. Throws
/// SingleClass unless both labels are present.
std::pair<std::vector<RocPoint>, double> roc_auc(
    std::span<const std::pair<double, bool>> score_is_attack);

/// Threshold where the APCER and BPCER curves cross, chosen over all
/// candidate cut points (class extremes and midpoints between adjacent
/// distinct scores) by minimizing |APCER - BPCER|; ties prefer lower BPCER,
/// then the lower threshold. Returns (threshold, (APCER+BPCER)/2).
std::pair<double, double> eer_threshold(std::span<const std::pair<double, bool>> score_is_attack);

struct Rates {
  std::optional<double> apcer;     // attacks with score <= threshold / attacks
  std::optional<double> bpcer;     // bona fide with score > threshold / bona fide
  std::optional<double> accuracy;  // total correct / total
};

Rates apcer_bpcer(std::span<const std::pair<double, bool>> score_is_attack, double threshold);

enum class Method { Base, WeightedAreas };

Method method_from_string(const std::string& s);
const char* to_string(Method m);

struct FoldReport {
  int fold = 0;
  double apcer = 0, bpcer = 0, accuracy = 0, auc = 0;
  double eer = 0;        // training-set EER defining the threshold
  double threshold = 0;  // learned on the fold's training scores
  std::size_t n_train = 0, n_test = 0;
  std::vector<RocPoint> roc;  // test-set ROC
};

struct BoxStats {
  double mean = 0, median = 0, q1 = 0, q3 = 0, min = 0, max = 0;
};

/// Aggregated evaluation results. For multi-fold runs the scalar metrics are
/// fold means and `roc` is fold 0's curve; per-fold values carry the spread.
struct EvalReport {
  std::string scenario;
  std::string method;
  std::uint64_t seed = 0;
  double apcer = 0, bpcer = 0, accuracy = 0, auc = 0;
  double eer = 0;
  double threshold = 0;
  std::vector<RocPoint> roc;
  std::vector<FoldReport> per_fold;
  BoxStats accuracy_box, auc_box, apcer_box, bpcer_box;
};

struct RunOptions {
  int jobs = 0;  // worker count for per-sample scoring; 0 = hardware default
  TrainOptions train;
  /// Grid-search space for Method::WeightedAreas.
  std::vector<int> radial_candidates{std::begin(kDefaultRadialCandidates),
                                     std::end(kDefaultRadialCandidates)};
  std::vector<int> angular_candidates{std::begin(kDefaultAngularCandidates),
                                      std::end(kDefaultAngularCandidates)};
};

/// End-to-end harness: builds splits, scores every involved sample (normals
/// estimated once per entry and shared across folds), learns the EER
/// threshold on each fold's training scores, evaluates the fold's test set,
/// and aggregates. Deterministic for a fixed spec.seed.
EvalReport run_scenario(const DatasetManifest& manifest, const SplitSpec& spec, Method method,
                        const LightRig& rig, const RunOptions& options = {});

BoxStats box_stats(std::span<const double> values);

/// Report emission.
std::string report_to_json(const EvalReport& report);
void save_report_json(const EvalReport& report, const std::filesystem::path& path);
void save_roc_csv(std::span<const RocPoint> roc, const std::filesystem::path& path);
void save_roc_svg(std::span<const RocPoint> roc, const std::filesystem::path& path);
void save_folds_csv(std::span<const FoldReport> folds, const std::filesystem::path& path);

}  // namespace irispad
