#include "irispad/areas.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "accum.hpp"
#include "json.hpp"

namespace irispad {

double dprime(double mu_authentic, double sigma_authentic, double mu_contact,
              double sigma_contact) {
  const double pooled = 0.5 * (sigma_authentic * sigma_authentic + sigma_contact * sigma_contact);
  const double diff = mu_authentic - mu_contact;
  if (pooled <= 0) {
    if (diff == 0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return diff / std::sqrt(pooled);
}

namespace {

// Pixels of one sample that can ever contribute: masked, valid normals,
// inside the annulus. Stored compactly so the p-loop does not rescan rasters.
struct CompactSample {
  std::vector<std::int32_t> sectors;
  std::vector<Vec3> normals;
  bool is_attack = false;
};

CompactSample compact(const AreaSample& sample, const SectorGridParams& params) {
  const SectorGrid grid(sample.geometry, params);
  const SectorMap map = build_sector_map(grid, sample.field->width, sample.field->height);
  CompactSample out;
  out.is_attack = sample.is_attack;
  for (std::size_t p = 0; p < map.ids.size(); ++p) {
    if (map.ids[p] < 0 || !sample.mask->bits[p] || !sample.field->valid.bits[p]) continue;
    out.sectors.push_back(map.ids[p]);
    out.normals.push_back(sample.field->normals[p]);
  }
  return out;
}

// Weighted deviation statistic over a compact sample; same arithmetic as
// weighted_score.
// nullopt when no pixel lands in a positively-weighted sector.
std::optional<double> weighted_stat(const CompactSample& s, std::span<const double> weights) {
  Accum sx, sy, sz;
  std::size_t n = 0;
  for (std::size_t p = 0; p < s.sectors.size(); ++p) {
    if (weights[static_cast<std::size_t>(s.sectors[p])] <= 0) continue;
    sx.add(s.normals[p][0]);
    sy.add(s.normals[p][1]);
    sz.add(s.normals[p][2]);
    ++n;
  }
  if (n == 0) return std::nullopt;
  const double inv = 1.0 / static_cast<double>(n);
  const Vec3 mean{sx.value() * inv, sy.value() * inv, sz.value() * inv};

  Accum wl, wsum;
  for (std::size_t p = 0; p < s.sectors.size(); ++p) {
    const double w = weights[static_cast<std::size_t>(s.sectors[p])];
    if (w <= 0) continue;
    const Vec3 d = sub(s.normals[p], mean);
    wl.add(w * dot(d, d));
    wsum.add(w);
  }
  const double lw = wl.value() / wsum.value();

  Accum num;
  for (std::size_t p = 0; p < s.sectors.size(); ++p) {
    const double w = weights[static_cast<std::size_t>(s.sectors[p])];
    if (w <= 0) continue;
    const Vec3 d = sub(s.normals[p], mean);
    const double l = dot(d, d);
    num.add(w * (l - lw) * (l - lw));
  }
  return num.value() / wsum.value();
}

struct Moments {
  double mu = 0, sigma = 0;
  std::size_t n = 0;
};

Moments moments(std::span<const double> values) {
  Moments m;
  m.n = values.size();
  if (m.n == 0) return m;
  Accum sum;
  for (const double v : values) sum.add(v);
  m.mu = sum.value() / static_cast<double>(m.n);
  m.sigma = std::sqrt(population_variance(values));
  return m;
}

double class_dprime(std::span<const double> authentic, std::span<const double> contact) {
  const Moments a = moments(authentic);
  const Moments c = moments(contact);
  return dprime(a.mu, a.sigma, c.mu, c.sigma);
}

double rank_key(double d, bool signed_dprime) { return signed_dprime ? d : std::abs(d); }

double finite_or_clamped(double v) {
  if (std::isinf(v)) return std::copysign(std::numeric_limits<double>::max(), v);
  return v;
}

}  // namespace

SectorScoreMatrix sector_scores(std::span<const AreaSample> samples,
                                const SectorGridParams& params) {
  if (params.radial < 1 || params.angular < 1)
    throw Error(ErrorCode::InvalidGeometry, "sector counts must be >= 1");
  const int n_sectors = params.sector_count();
  SectorScoreMatrix matrix;
  matrix.n_samples = samples.size();
  matrix.params = params;
  matrix.cells.assign(samples.size() * static_cast<std::size_t>(n_sectors), std::nullopt);

  for (std::size_t s = 0; s < samples.size(); ++s) {
    const AreaSample& sample = samples[s];
    const SectorGrid grid(sample.geometry, params);
    const SectorMap map = build_sector_map(grid, sample.field->width, sample.field->height);

    std::vector<std::vector<std::uint32_t>> buckets(static_cast<std::size_t>(n_sectors));
    for (std::size_t p = 0; p < map.ids.size(); ++p) {
      if (map.ids[p] < 0 || !sample.mask->bits[p]) continue;
      buckets[static_cast<std::size_t>(map.ids[p])].push_back(static_cast<std::uint32_t>(p));
    }
    for (int sector = 0; sector < n_sectors; ++sector) {
      try {
        matrix.cells[s * static_cast<std::size_t>(n_sectors) + static_cast<std::size_t>(sector)] =
            base_score_over(*sample.field, buckets[static_cast<std::size_t>(sector)]).value;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyRegion && e.code() != ErrorCode::DegenerateRegion) throw;
      }
    }
  }
  return matrix;
}

std::vector<SectorStats> sector_stats(const SectorScoreMatrix& scores,
                                      std::span<const std::uint8_t> is_attack) {
  if (is_attack.size() != scores.n_samples)
    throw Error(ErrorCode::DimensionMismatch, "one label per sample required");
  const int n_sectors = scores.params.sector_count();
  std::vector<SectorStats> stats(static_cast<std::size_t>(n_sectors));
  std::vector<double> authentic, contact;
  for (int sector = 0; sector < n_sectors; ++sector) {
    authentic.clear();
    contact.clear();
    for (std::size_t s = 0; s < scores.n_samples; ++s) {
      const auto& cell = scores.at(s, sector);
      if (!cell) continue;
      (is_attack[s] ? contact : authentic).push_back(*cell);
    }
    SectorStats& st = stats[static_cast<std::size_t>(sector)];
    st.sector = sector;
    st.n_authentic = authentic.size();
    st.n_contact = contact.size();
    if (!authentic.empty() && !contact.empty()) {
      const Moments a = moments(authentic);
      const Moments c = moments(contact);
      st.mu_authentic = a.mu;
      st.sigma_authentic = a.sigma;
      st.mu_contact = c.mu;
      st.sigma_contact = c.sigma;
      st.dprime = dprime(a.mu, a.sigma, c.mu, c.sigma);
      st.defined = true;
    }
  }
  return stats;
}

std::vector<double> AreaModel::weights() const {
  std::vector<double> w(static_cast<std::size_t>(params.sector_count()), 0.0);
  for (const auto& s : selected) {
    const double v = std::min(std::abs(s.dprime), kWeightClamp);
    w[static_cast<std::size_t>(s.radial * params.angular + s.angular)] = v;
  }
  return w;
}

AreaModel train_area_model(std::span<const AreaSample> samples, const SectorGridParams& params,
                           const TrainOptions& options) {
  bool any_attack = false, any_authentic = false;
  for (const auto& s : samples) (s.is_attack ? any_attack : any_authentic) = true;
  if (!any_attack || !any_authentic)
    throw Error(ErrorCode::SingleClassDataset, "training needs both classes");

  const SectorScoreMatrix matrix = sector_scores(samples, params);
  std::vector<std::uint8_t> is_attack(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) is_attack[s] = samples[s].is_attack;
  std::vector<SectorStats> stats = sector_stats(matrix, is_attack);

  // Ranking pool: defined sectors with nonzero separation. A zero-d' sector
  // would enter the weight map with weight 0, which is the same as leaving
  // it out.
  std::vector<int> ranked;
  for (const auto& st : stats)
    if (st.defined && std::abs(st.dprime) > 0) ranked.push_back(st.sector);
  if (ranked.empty())
    throw Error(ErrorCode::AllSectorsDegenerate, "no sector separates the classes");
  std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
    const double ka = rank_key(stats[static_cast<std::size_t>(a)].dprime, options.signed_dprime);
    const double kb = rank_key(stats[static_cast<std::size_t>(b)].dprime, options.signed_dprime);
    if (ka != kb) return ka > kb;
    return a < b;
  });

  std::vector<CompactSample> compacts;
  compacts.reserve(samples.size());
  for (const auto& s : samples) compacts.push_back(compact(s, params));

  const int rt = params.sector_count();
  std::vector<double> weights(static_cast<std::size_t>(rt), 0.0);
  AreaModel model;
  model.params = params;
  model.stats = stats;
  model.history.reserve(static_cast<std::size_t>(rt));

  int best_p = 0;
  double best_key = -std::numeric_limits<double>::infinity();
  double best_global = 0;
  std::vector<double> authentic, contact;
  for (int p = 1; p <= rt; ++p) {
    if (p <= static_cast<int>(ranked.size())) {
      const int sector = ranked[static_cast<std::size_t>(p - 1)];
      weights[static_cast<std::size_t>(sector)] =
          std::min(std::abs(stats[static_cast<std::size_t>(sector)].dprime), kWeightClamp);
    }
    authentic.clear();
    contact.clear();
    for (const auto& c : compacts)
      if (const auto q = weighted_stat(c, weights)) (c.is_attack ? contact : authentic).push_back(*q);

    double global = 0;
    if (!authentic.empty() && !contact.empty()) global = class_dprime(authentic, contact);
    model.history.emplace_back(p, global);

    const double key =
        (authentic.empty() || contact.empty())
            ? -std::numeric_limits<double>::infinity()
            : rank_key(global, options.signed_dprime);
    if (key > best_key) {
      best_key = key;
      best_p = p;
      best_global = global;
    }
  }
  if (best_p == 0)
    throw Error(ErrorCode::AllSectorsDegenerate, "no iteration produced both score classes");

  model.chosen_p = best_p;
  model.global_dprime = best_global;
  const int n_selected = std::min(best_p, static_cast<int>(ranked.size()));
  for (int p = 0; p < n_selected; ++p) {
    const int sector = ranked[static_cast<std::size_t>(p)];
    model.selected.push_back(SelectedSector{sector / params.angular, sector % params.angular,
                                            stats[static_cast<std::size_t>(sector)].dprime});
  }
  return model;
}

AreaModel grid_search(std::span<const AreaSample> samples, std::span<const int> radial_candidates,
                      std::span<const int> angular_candidates, const TrainOptions& options) {
  if (radial_candidates.empty() || angular_candidates.empty())
    throw Error(ErrorCode::InvalidSpec, "grid search needs candidate sector counts");

  std::optional<AreaModel> best;
  std::optional<Error> last_degenerate;
  for (const int r : radial_candidates) {
    for (const int t : angular_candidates) {
      AreaModel model;
      try {
        model = train_area_model(samples, SectorGridParams{r, t}, options);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::AllSectorsDegenerate) {
          last_degenerate = e;
          continue;
        }
        throw;
      }
      if (!best) {
        best = std::move(model);
        continue;
      }
      const double knew = rank_key(model.global_dprime, options.signed_dprime);
      const double kold = rank_key(best->global_dprime, options.signed_dprime);
      const auto tie_break = [](const AreaModel& m) {
        return std::make_tuple(m.params.sector_count(), m.params.radial, m.params.angular);
      };
      if (knew > kold || (knew == kold && tie_break(model) < tie_break(*best)))
        best = std::move(model);
    }
  }
  if (!best) throw last_degenerate.value_or(Error(ErrorCode::AllSectorsDegenerate, "grid search failed"));
  return *best;
}

AreaModel grid_search(std::span<const AreaSample> samples, const TrainOptions& options) {
  return grid_search(samples, kDefaultRadialCandidates, kDefaultAngularCandidates, options);
}

void save_area_model(const AreaModel& model, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["r"] = model.params.radial;
  doc["t"] = model.params.angular;
  doc["geometry_convention"] = "pupil-ray";
  auto& selected = doc["selected"] = nlohmann::json::array();
  for (const auto& s : model.selected)
    selected.push_back({{"i", s.radial}, {"j", s.angular}, {"dprime", finite_or_clamped(s.dprime)}});
  auto& history = doc["history"] = nlohmann::json::array();
  for (const auto& [p, d] : model.history) history.push_back({p, finite_or_clamped(d)});

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
}

AreaModel load_area_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": " + e.what());
  }
  try {
    AreaModel model;
    model.params.radial = doc.at("r").get<int>();
    model.params.angular = doc.at("t").get<int>();
    if (doc.at("geometry_convention").get<std::string>() != "pupil-ray")
      throw Error(ErrorCode::UnsupportedFormat,
                  path.string() + ": unknown geometry convention");
    for (const auto& s : doc.at("selected"))
      model.selected.push_back(
          SelectedSector{s.at("i").get<int>(), s.at("j").get<int>(), s.at("dprime").get<double>()});
    for (const auto& h : doc.at("history"))
      model.history.emplace_back(h.at(0).get<int>(), h.at(1).get<double>());
    model.chosen_p = static_cast<int>(model.selected.size());
    if (model.chosen_p >= 1 && model.chosen_p <= static_cast<int>(model.history.size()))
      model.global_dprime = model.history[static_cast<std::size_t>(model.chosen_p - 1)].second;
    if (model.params.radial < 1 || model.params.angular < 1)
      throw Error(ErrorCode::CorruptFile, path.string() + ": bad sector counts");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, path.string() + ": " + e.what());
  }
}

GrayImage significance_map(const AreaModel& model, std::uint32_t size) {
  if (size < 8) throw Error(ErrorCode::InvalidSpec, "significance map size too small");
  const double half = size / 2.0;
  AnnulusGeometry geom;
  geom.pupil_cx = geom.iris_cx = half;
  geom.pupil_cy = geom.iris_cy = half;
  geom.pupil_r = 0.30 * half;
  geom.iris_r = 0.96 * half;
  const SectorGrid grid(geom, model.params);

  std::vector<double> value(static_cast<std::size_t>(model.params.sector_count()), 0.0);
  if (!model.stats.empty()) {
    for (const auto& st : model.stats)
      if (st.defined)
        value[static_cast<std::size_t>(st.sector)] = std::min(std::abs(st.dprime), kWeightClamp);
  } else {
    for (const auto& s : model.selected)
      value[static_cast<std::size_t>(s.radial * model.params.angular + s.angular)] =
          std::min(std::abs(s.dprime), kWeightClamp);
  }
  double peak = 0;
  for (const double v : value) peak = std::max(peak, v);

  GrayImage img(size, size);
  if (peak <= 0) return img;
  for (std::uint32_t y = 0; y < size; ++y) {
    for (std::uint32_t x = 0; x < size; ++x) {
      const auto ij = sector_index(grid, x, y);
      if (!ij) continue;
      const double v = value[static_cast<std::size_t>(ij->first * model.params.angular + ij->second)];
      img.at(x, y) = static_cast<std::uint8_t>(std::lround(255.0 * v / peak));
    }
  }
  return img;
}

}  // namespace irispad
