#include "irispad/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "accum.hpp"
#include "irispad/rng.hpp"
#include "irispad/roi.hpp"
#include "irispad/score.hpp"
#include "json.hpp"

namespace irispad {

Scenario scenario_from_string(const std::string& s) {
  if (s == "train-regular-test-irregular") return Scenario::TrainRegularTestIrregular;
  if (s == "train-irregular-test-regular") return Scenario::TrainIrregularTestRegular;
  if (s == "mixed-crossval") return Scenario::MixedCrossVal;
  if (s == "clear-lens-test") return Scenario::ClearLensTest;
  if (s == "custom") return Scenario::Custom;
  throw Error(ErrorCode::InvalidSpec, "unknown scenario '" + s + "'");
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::TrainRegularTestIrregular: return "train-regular-test-irregular";
    case Scenario::TrainIrregularTestRegular: return "train-irregular-test-regular";
    case Scenario::MixedCrossVal: return "mixed-crossval";
    case Scenario::ClearLensTest: return "clear-lens-test";
    case Scenario::Custom: return "custom";
  }
  return "custom";
}

Method method_from_string(const std::string& s) {
  if (s == "base") return Method::Base;
  if (s == "weighted-areas") return Method::WeightedAreas;
  throw Error(ErrorCode::InvalidSpec, "unknown method '" + s + "'");
}

const char* to_string(Method m) {
  return m == Method::Base ? "base" : "weighted-areas";
}

bool TagFilter::matches(const ManifestEntry& entry) const {
  if (any_of.empty()) return true;
  for (const auto& tag : any_of)
    if (entry.has_tag(tag)) return true;
  return false;
}

namespace {

constexpr const char* kClearTag = "clear";

struct Groups {
  std::vector<std::size_t> attacks;
  std::vector<std::size_t> authentic;  // bona fide without the clear tag
  std::vector<std::size_t> clear;
};

Groups group_entries(const DatasetManifest& manifest) {
  Groups g;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const ManifestEntry& e = manifest.entries[i];
    if (e.label == Label::Attack)
      g.attacks.push_back(i);
    else if (e.label == Label::BonaFide)
      (e.has_tag(kClearTag) ? g.clear : g.authentic).push_back(i);
  }
  return g;
}

std::vector<std::size_t> tagged_attacks(const DatasetManifest& manifest, const char* tag) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i)
    if (manifest.entries[i].label == Label::Attack && manifest.entries[i].has_tag(tag))
      out.push_back(i);
  return out;
}

// Scenario (a)/(b): fixed attack subsets and a proportionate draw of
// authentic images for training, the rest of the authentic set for testing.
FoldSplit swap_scenario_split(const DatasetManifest& manifest, const SplitSpec& spec,
                              const char* train_tag, const char* test_tag) {
  const auto train_attacks = tagged_attacks(manifest, train_tag);
  const auto test_attacks = tagged_attacks(manifest, test_tag);
  if (train_attacks.empty())
    throw Error(ErrorCode::TagMismatch, std::string("no attack entries tagged '") + train_tag + "'");
  if (test_attacks.empty())
    throw Error(ErrorCode::TagMismatch, std::string("no attack entries tagged '") + test_tag + "'");
  Groups g = group_entries(manifest);
  if (g.authentic.empty()) throw Error(ErrorCode::InsufficientData, "no authentic entries");

  Rng rng(spec.seed, 0);
  rng.shuffle(g.authentic);
  const std::size_t n_train_auth = std::min(train_attacks.size(), g.authentic.size());

  FoldSplit fold;
  fold.train = train_attacks;
  fold.train.insert(fold.train.end(), g.authentic.begin(), g.authentic.begin() + n_train_auth);
  fold.test = test_attacks;
  fold.test.insert(fold.test.end(), g.authentic.begin() + n_train_auth, g.authentic.end());
  return fold;
}

std::vector<FoldSplit> bootstrap_splits(const DatasetManifest& manifest, const SplitSpec& spec) {
  const Groups g = group_entries(manifest);
  if (g.attacks.empty() || g.authentic.empty())
    throw Error(ErrorCode::InsufficientData, "bootstrap scenarios need attacks and authentic entries");
  const bool clear_test = spec.scenario == Scenario::ClearLensTest;
  if (clear_test && g.clear.empty())
    throw Error(ErrorCode::TagMismatch, "no entries tagged 'clear'");

  // The pool the training multiset must match in size: every entry taking
  // part in the scenario.
  const std::size_t universe = g.attacks.size() + g.authentic.size() +
                               (clear_test ? g.clear.size() : 0);

  std::vector<FoldSplit> folds;
  for (int f = 0; f < spec.folds; ++f) {
    Rng rng(spec.seed, static_cast<std::uint64_t>(f) + 1);

    // Candidates: a random half of the attacks plus all authentic images.
    std::vector<std::size_t> half = g.attacks;
    rng.shuffle(half);
    half.resize(g.attacks.size() / 2);
    std::vector<std::size_t> candidates = half;
    candidates.insert(candidates.end(), g.authentic.begin(), g.authentic.end());

    FoldSplit fold;
    fold.train.reserve(universe);
    std::unordered_set<std::size_t> drawn;
    for (std::size_t d = 0; d < universe; ++d) {
      const std::size_t pick = candidates[rng.below(candidates.size())];
      fold.train.push_back(pick);
      drawn.insert(pick);
    }

    for (const std::size_t a : g.attacks)
      if (!drawn.count(a)) fold.test.push_back(a);
    if (clear_test) {
      fold.test.insert(fold.test.end(), g.clear.begin(), g.clear.end());
    } else {
      for (const std::size_t a : g.authentic)
        if (!drawn.count(a)) fold.test.push_back(a);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

std::vector<FoldSplit> kfold_splits(const DatasetManifest& manifest, const SplitSpec& spec) {
  const Groups g = group_entries(manifest);
  if (g.attacks.empty() || g.authentic.empty())
    throw Error(ErrorCode::InsufficientData, "k-fold needs attacks and authentic entries");
  const bool clear_test = spec.scenario == Scenario::ClearLensTest;
  if (clear_test && g.clear.empty())
    throw Error(ErrorCode::TagMismatch, "no entries tagged 'clear'");

  Rng rng(spec.seed, 0);
  std::vector<std::size_t> attacks = g.attacks;
  std::vector<std::size_t> authentic = g.authentic;
  rng.shuffle(attacks);
  rng.shuffle(authentic);

  const auto folds_count = static_cast<std::size_t>(spec.folds);
  std::vector<FoldSplit> folds(folds_count);
  for (std::size_t f = 0; f < folds_count; ++f) {
    FoldSplit& fold = folds[f];
    for (std::size_t i = 0; i < attacks.size(); ++i)
      (i % folds_count == f ? fold.test : fold.train).push_back(attacks[i]);
    if (clear_test) {
      // Clear-lens wearers are test-only; every authentic image trains.
      fold.train.insert(fold.train.end(), authentic.begin(), authentic.end());
      fold.test.insert(fold.test.end(), g.clear.begin(), g.clear.end());
    } else {
      for (std::size_t i = 0; i < authentic.size(); ++i)
        (i % folds_count == f ? fold.test : fold.train).push_back(authentic[i]);
    }
  }
  return folds;
}

}  // namespace

std::vector<FoldSplit> build_splits(const DatasetManifest& manifest, const SplitSpec& spec) {
  if (spec.folds < 1) throw Error(ErrorCode::InvalidSpec, "folds must be >= 1");
  switch (spec.scenario) {
    case Scenario::TrainRegularTestIrregular:
      return {swap_scenario_split(manifest, spec, "textured-regular", "textured-irregular")};
    case Scenario::TrainIrregularTestRegular:
      return {swap_scenario_split(manifest, spec, "textured-irregular", "textured-regular")};
    case Scenario::MixedCrossVal:
    case Scenario::ClearLensTest:
      return spec.classic_kfold ? kfold_splits(manifest, spec) : bootstrap_splits(manifest, spec);
    case Scenario::Custom: {
      FoldSplit fold;
      for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const bool in_train = spec.train_filter.matches(manifest.entries[i]);
        const bool in_test = spec.test_filter.matches(manifest.entries[i]);
        if (in_train && in_test)
          throw Error(ErrorCode::TagMismatch, "train and test filters overlap on sample '" +
                                                  manifest.entries[i].sample_id + "'");
        if (in_train) fold.train.push_back(i);
        if (in_test) fold.test.push_back(i);
      }
      if (fold.train.empty() || fold.test.empty())
        throw Error(ErrorCode::InsufficientData, "custom filters selected an empty side");
      return {std::move(fold)};
    }
  }
  throw Error(ErrorCode::InvalidSpec, "unknown scenario");
}

std::pair<std::vector<RocPoint>, double> roc_auc(
    std::span<const std::pair<double, bool>> score_is_attack) {
  std::size_t n_attack = 0, n_bona = 0;
  for (const auto& [s, attack] : score_is_attack) (attack ? n_attack : n_bona) += 1;
  if (n_attack == 0 || n_bona == 0)
    throw Error(ErrorCode::SingleClass, "ROC needs both classes");

  std::vector<std::pair<double, bool>> sorted(score_is_attack.begin(), score_is_attack.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  // One point per distinct score (classification rule: score > threshold =>
  // attack), plus the all-attack endpoint. Ties collapse into single steps.
  std::vector<RocPoint> points;
  std::size_t attacks_above = 0, bona_above = 0;
  // Trapezoid area accumulated in the counts domain (half-integers are exact
  // in a double), so the result coincides with pair counting bit for bit.
  double area_counts = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double threshold = sorted[i].first;
    points.push_back(RocPoint{static_cast<double>(bona_above) / static_cast<double>(n_bona),
                              static_cast<double>(attacks_above) / static_cast<double>(n_attack),
                              threshold});
    const std::size_t attacks_before = attacks_above, bona_before = bona_above;
    while (i < sorted.size() && sorted[i].first == threshold) {
      (sorted[i].second ? attacks_above : bona_above) += 1;
      ++i;
    }
    area_counts += static_cast<double>(bona_above - bona_before) * 0.5 *
                   static_cast<double>(attacks_before + attacks_above);
  }
  points.push_back(RocPoint{1.0, 1.0, sorted.back().first - 1.0});

  const double auc =
      area_counts / (static_cast<double>(n_attack) * static_cast<double>(n_bona));
  return {std::move(points), auc};
}

namespace {

struct ErrorRates {
  double apcer = 0, bpcer = 0;
};

ErrorRates rates_at(std::span<const std::pair<double, bool>> scores, double threshold,
                    std::size_t n_attack, std::size_t n_bona) {
  std::size_t missed_attacks = 0, flagged_bona = 0;
  for (const auto& [s, attack] : scores) {
    if (attack && s <= threshold) ++missed_attacks;
    if (!attack && s > threshold) ++flagged_bona;
  }
  return ErrorRates{static_cast<double>(missed_attacks) / static_cast<double>(n_attack),
                    static_cast<double>(flagged_bona) / static_cast<double>(n_bona)};
}

}  // namespace

std::pair<double, double> eer_threshold(
    std::span<const std::pair<double, bool>> score_is_attack) {
  std::size_t n_attack = 0, n_bona = 0;
  for (const auto& [s, attack] : score_is_attack) (attack ? n_attack : n_bona) += 1;
  if (n_attack == 0 || n_bona == 0)
    throw Error(ErrorCode::SingleClass, "EER needs both classes");

  std::vector<double> distinct;
  distinct.reserve(score_is_attack.size());
  for (const auto& [s, attack] : score_is_attack) distinct.push_back(s);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> candidates;
  candidates.push_back(distinct.front() - 1.0);
  for (std::size_t i = 1; i < distinct.size(); ++i)
    candidates.push_back(0.5 * (distinct[i - 1] + distinct[i]));
  candidates.push_back(distinct.back());
  std::sort(candidates.begin(), candidates.end());

  double best_t = candidates.front();
  double best_diff = std::numeric_limits<double>::infinity();
  double best_bpcer = std::numeric_limits<double>::infinity();
  double best_eer = 0;
  for (const double t : candidates) {
    const ErrorRates r = rates_at(score_is_attack, t, n_attack, n_bona);
    const double diff = std::abs(r.apcer - r.bpcer);
    if (diff < best_diff || (diff == best_diff && r.bpcer < best_bpcer)) {
      best_diff = diff;
      best_bpcer = r.bpcer;
      best_t = t;
      best_eer = 0.5 * (r.apcer + r.bpcer);
    }
  }
  return {best_t, best_eer};
}

Rates apcer_bpcer(std::span<const std::pair<double, bool>> score_is_attack, double threshold) {
  std::size_t n_attack = 0, n_bona = 0, missed_attacks = 0, flagged_bona = 0;
  for (const auto& [s, attack] : score_is_attack) {
    if (attack) {
      ++n_attack;
      if (s <= threshold) ++missed_attacks;
    } else {
      ++n_bona;
      if (s > threshold) ++flagged_bona;
    }
  }
  Rates out;
  if (n_attack > 0)
    out.apcer = static_cast<double>(missed_attacks) / static_cast<double>(n_attack);
  if (n_bona > 0) out.bpcer = static_cast<double>(flagged_bona) / static_cast<double>(n_bona);
  if (n_attack + n_bona > 0) {
    const std::size_t correct = (n_attack - missed_attacks) + (n_bona - flagged_bona);
    out.accuracy = static_cast<double>(correct) / static_cast<double>(n_attack + n_bona);
  }
  return out;
}

BoxStats box_stats(std::span<const double> values) {
  BoxStats out;
  if (values.empty()) return out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Accum sum;
  for (const double v : sorted) sum.add(v);
  out.mean = sum.value() / static_cast<double>(sorted.size());
  out.min = sorted.front();
  out.max = sorted.back();
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
  };
  out.q1 = quantile(0.25);
  out.median = quantile(0.5);
  out.q3 = quantile(0.75);
  return out;
}

namespace {

// Everything run_scenario needs about one manifest entry, computed once and
// shared read-only across folds.
struct EntryCache {
  NormalField field;
  BinaryMask mask;  // combined occlusion mask, restricted to the annulus when known
  AnnulusGeometry geometry;
  bool has_geometry = false;
  bool is_attack = false;
  double base = 0;  // base-method PAD score
};

EntryCache prepare_entry(const DatasetManifest& manifest, std::size_t index, const LightRig& rig,
                         bool need_base) {
  const ManifestEntry& e = manifest.entries[index];
  const ImagePair pair = manifest.load_pair(index);
  EntryCache cache;
  cache.is_attack = e.label == Label::Attack;
  cache.field = estimate_normals(pair, rig);
  cache.mask = combined_mask(pair);
  if (e.annulus) {
    cache.geometry = *e.annulus;
    cache.has_geometry = true;
    cache.mask = combined_mask(cache.mask, annulus_mask(cache.geometry, pair.width(), pair.height()));
  }
  if (need_base) cache.base = base_score(cache.field, cache.mask).value;
  return cache;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

nlohmann::json box_to_json(const BoxStats& b) {
  return {{"mean", b.mean}, {"median", b.median}, {"q1", b.q1},
          {"q3", b.q3},     {"min", b.min},       {"max", b.max}};
}

}  // namespace

EvalReport run_scenario(const DatasetManifest& manifest, const SplitSpec& spec, Method method,
                        const LightRig& rig, const RunOptions& options) {
  const std::vector<FoldSplit> folds = build_splits(manifest, spec);

  std::vector<std::size_t> involved;
  {
    std::unordered_set<std::size_t> seen;
    for (const auto& fold : folds) {
      for (const std::size_t i : fold.train)
        if (seen.insert(i).second) involved.push_back(i);
      for (const std::size_t i : fold.test)
        if (seen.insert(i).second) involved.push_back(i);
    }
    std::sort(involved.begin(), involved.end());
  }

  // Score inputs are per-entry and fold-independent; workers fill disjoint
  // slots of a preallocated vector, so scheduling cannot change results.
  std::vector<EntryCache> storage(involved.size());
  std::unordered_map<std::size_t, std::size_t> slot_of(involved.size());
  for (std::size_t s = 0; s < involved.size(); ++s) slot_of.emplace(involved[s], s);
  const auto cache_of = [&](std::size_t entry) -> const EntryCache& {
    return storage[slot_of.at(entry)];
  };
  {
    unsigned workers = options.jobs > 0 ? static_cast<unsigned>(options.jobs)
                                        : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(involved.size()));
    const bool need_base = method == Method::Base;
    if (workers <= 1) {
      for (std::size_t s = 0; s < involved.size(); ++s)
        storage[s] = prepare_entry(manifest, involved[s], rig, need_base);
    } else {
      std::atomic<std::size_t> next{0};
      std::mutex error_mutex;
      std::exception_ptr first_error;
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (;;) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= involved.size()) return;
            try {
              storage[slot] = prepare_entry(manifest, involved[slot], rig, need_base);
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
  }

  if (method == Method::WeightedAreas) {
    for (const std::size_t i : involved)
      if (!cache_of(i).has_geometry)
        throw Error(ErrorCode::InvalidGeometry,
                    "entry '" + manifest.entries[i].sample_id +
                        "' has no annulus geometry, required by the weighted method");
  }

  EvalReport report;
  report.scenario = to_string(spec.scenario);
  report.method = to_string(method);
  report.seed = spec.seed;

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const FoldSplit& fold = folds[f];
    if (fold.train.empty() || fold.test.empty())
      throw Error(ErrorCode::InsufficientData, "fold " + std::to_string(f) + " has an empty side");

    std::vector<double> weights;
    SectorGridParams fold_params;
    if (method == Method::WeightedAreas) {
      std::vector<AreaSample> train_samples;
      train_samples.reserve(fold.train.size());
      for (const std::size_t i : fold.train) {
        const EntryCache& c = cache_of(i);
        train_samples.push_back(AreaSample{&c.field, &c.mask, c.geometry, c.is_attack});
      }
      const AreaModel model = grid_search(train_samples, options.radial_candidates,
                                          options.angular_candidates, options.train);
      weights = model.weights();
      fold_params = model.params;
    }

    const auto score_of = [&](std::size_t i) {
      const EntryCache& c = cache_of(i);
      if (method == Method::Base) return c.base;
      return weighted_score(c.field, c.mask, SectorGrid(c.geometry, fold_params), weights).value;
    };

    std::vector<std::pair<double, bool>> train_scores, test_scores;
    train_scores.reserve(fold.train.size());
    for (const std::size_t i : fold.train)
      train_scores.emplace_back(score_of(i), cache_of(i).is_attack);
    test_scores.reserve(fold.test.size());
    for (const std::size_t i : fold.test)
      test_scores.emplace_back(score_of(i), cache_of(i).is_attack);

    const auto [threshold, eer] = eer_threshold(train_scores);
    const Rates rates = apcer_bpcer(test_scores, threshold);
    if (!rates.apcer || !rates.bpcer)
      throw Error(ErrorCode::InsufficientData,
                  "fold " + std::to_string(f) + " test set lacks a class");
    auto [roc, auc] = roc_auc(test_scores);

    FoldReport fr;
    fr.fold = static_cast<int>(f);
    fr.apcer = *rates.apcer;
    fr.bpcer = *rates.bpcer;
    fr.accuracy = *rates.accuracy;
    fr.auc = auc;
    fr.eer = eer;
    fr.threshold = threshold;
    fr.n_train = fold.train.size();
    fr.n_test = fold.test.size();
    fr.roc = std::move(roc);
    report.per_fold.push_back(std::move(fr));
  }

  std::vector<double> apcers, bpcers, accuracies, aucs, eers, thresholds;
  for (const auto& fr : report.per_fold) {
    apcers.push_back(fr.apcer);
    bpcers.push_back(fr.bpcer);
    accuracies.push_back(fr.accuracy);
    aucs.push_back(fr.auc);
    eers.push_back(fr.eer);
    thresholds.push_back(fr.threshold);
  }
  const auto mean = [](std::span<const double> v) {
    Accum a;
    for (const double x : v) a.add(x);
    return a.value() / static_cast<double>(v.size());
  };
  report.apcer = mean(apcers);
  report.bpcer = mean(bpcers);
  report.accuracy = mean(accuracies);
  report.auc = mean(aucs);
  report.eer = mean(eers);
  report.threshold = mean(thresholds);
  report.roc = report.per_fold.front().roc;
  report.accuracy_box = box_stats(accuracies);
  report.auc_box = box_stats(aucs);
  report.apcer_box = box_stats(apcers);
  report.bpcer_box = box_stats(bpcers);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json doc;
  doc["scenario"] = report.scenario;
  doc["method"] = report.method;
  doc["seed"] = report.seed;
  doc["apcer"] = report.apcer;
  doc["bpcer"] = report.bpcer;
  doc["accuracy"] = report.accuracy;
  doc["auc"] = report.auc;
  doc["eer"] = report.eer;
  doc["threshold"] = report.threshold;
  auto& roc = doc["roc"] = nlohmann::json::array();
  for (const auto& p : report.roc) roc.push_back({p.fpr, p.tpr, p.threshold});
  auto& folds = doc["per_fold"] = nlohmann::json::array();
  for (const auto& fr : report.per_fold)
    folds.push_back({{"fold", fr.fold},
                     {"apcer", fr.apcer},
                     {"bpcer", fr.bpcer},
                     {"accuracy", fr.accuracy},
                     {"auc", fr.auc},
                     {"eer", fr.eer},
                     {"threshold", fr.threshold},
                     {"n_train", fr.n_train},
                     {"n_test", fr.n_test}});
  doc["boxes"] = {{"accuracy", box_to_json(report.accuracy_box)},
                  {"auc", box_to_json(report.auc_box)},
                  {"apcer", box_to_json(report.apcer_box)},
                  {"bpcer", box_to_json(report.bpcer_box)}};
  return doc.dump(2) + "\n";
}

void save_report_json(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << report_to_json(report);
}

void save_roc_csv(std::span<const RocPoint> roc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << "fpr,tpr,threshold\n";
  for (const auto& p : roc)
    out << format_double(p.fpr) << ',' << format_double(p.tpr) << ','
        << format_double(p.threshold) << "\n";
}

void save_roc_svg(std::span<const RocPoint> roc, const std::filesystem::path& path) {
  constexpr int kSize = 512, kMargin = 48;
  constexpr int kPlot = kSize - 2 * kMargin;
  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(1);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" viewBox=\"0 0 " << kSize << " " << kSize << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kPlot
      << "\" height=\"" << kPlot << "\" fill=\"none\" stroke=\"#888\"/>\n"
      << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin + kPlot << "\" x2=\"" << kMargin + kPlot
      << "\" y2=\"" << kMargin << "\" stroke=\"#ccc\" stroke-dasharray=\"4 4\"/>\n"
      << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">BPCER</text>\n"
      << "<text x=\"14\" y=\"" << kSize / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 14 "
      << kSize / 2 << ")\">1 - APCER</text>\n"
      << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
  for (const auto& p : roc)
    svg << kMargin + p.fpr * kPlot << ',' << kMargin + (1.0 - p.tpr) * kPlot << ' ';
  svg << "\"/>\n</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << svg.str();
}

void save_folds_csv(std::span<const FoldReport> folds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << "fold,apcer,bpcer,accuracy,auc,eer,threshold,n_train,n_test\n";
  for (const auto& f : folds)
    out << f.fold << ',' << format_double(f.apcer) << ',' << format_double(f.bpcer) << ','
        << format_double(f.accuracy) << ',' << format_double(f.auc) << ','
        << format_double(f.eer) << ',' << format_double(f.threshold) << ',' << f.n_train << ','
        << f.n_test << "\n";
}

}  // namespace irispad
