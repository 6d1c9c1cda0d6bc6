/*
 * Copyright 2026 The cropid Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cropid/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "cropid/core/error.hpp"
#include "cropid/core/parallel.hpp"
#include "cropid/datagen/geometry.hpp"

namespace cropid::synth {

namespace {

constexpr std::uint64_t kWorldStream = 0x776f726c64ULL;
constexpr std::uint64_t kObsStream = 0x6f6273ULL;
constexpr std::uint64_t kLabelStream = 0x6c6162ULL;

constexpr double kBareNdvi = 0.15;
constexpr double kVegThreshold = 0.4;
constexpr double kSteepnessDays = 6.0;
constexpr double kS1LeadDays = 10.0;
constexpr double kS1Steepness = 5.0;
constexpr int kLabelEdgeDays = 15;

const char* const kOtherCropNames[] = {"Potato", "Onion", "Tobacco", "Barley", "Jute", "Turmeric"};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Fraction of full canopy in [0, 1]; crosses the threshold level exactly at start and end.
double canopy(const TrueSeason& s, const CropTemplate& tpl, double t) {
  const double q = (kVegThreshold - kBareNdvi) / (tpl.peak_ndvi - kBareNdvi);
  const double rise_center = s.start - kSteepnessDays * logit(q);
  const double fall_center = s.end + kSteepnessDays * logit(q);
  return std::min(sigmoid((t - rise_center) / kSteepnessDays), sigmoid((fall_center - t) / kSteepnessDays));
}

double radar_activity(const TrueSeason& s, double t) {
  return std::min(sigmoid((t - (s.start - kS1LeadDays)) / kS1Steepness), sigmoid((s.end + 5.0 - t) / kS1Steepness));
}

struct FieldState {
  double ndvi = kBareNdvi;
  double canopy = 0.0;
  const CropTemplate* tpl = nullptr;
};

FieldState state_at(const FieldTruth& field, const SynthWorldConfig& config, Day day) {
  FieldState out;
  for (const auto& s : field.seasons) {
    if (day < s.start - 90 || day > s.end + 90) continue;
    const auto& tpl = config.templates[static_cast<std::size_t>(class_index(s.crop))];
    const double c = canopy(s, tpl, day);
    const double n = kBareNdvi + (tpl.peak_ndvi - kBareNdvi) * c;
    if (n > out.ndvi) out = {n, c, &tpl};
  }
  return out;
}

struct RadarState {
  double vv = 0.0;
  double vh = 0.0;
};

RadarState radar_at(const FieldTruth& field, const SynthWorldConfig& config, Day day) {
  RadarState out;
  for (const auto& s : field.seasons) {
    if (day < s.start - 90 || day > s.end + 90) continue;
    const auto& tpl = config.templates[static_cast<std::size_t>(class_index(s.crop))];
    const double a = radar_activity(s, day);
    out.vv = std::max(out.vv, tpl.vv_gain_db * a);
    out.vh = std::max(out.vh, tpl.vh_gain_db * a);
  }
  return out;
}

/// Acquisition days at a nominal cadence with a per-field phase and +-1 day jitter.
std::vector<Day> acquisition_days(Day first, Day last, int cadence, Rng& rng) {
  std::vector<Day> days;
  for (Day d = first + uniform_int(rng, 0, cadence - 1); d <= last; d += cadence) {
    const Day j = d + uniform_int(rng, -1, 1);
    if (j >= first && j <= last) days.push_back(j);
  }
  return days;
}

CropLabel draw_crop(const std::array<double, kNumClasses>& mix, Rng& rng) {
  std::discrete_distribution<int> d(mix.begin(), mix.end());
  return crop_from_index(d(rng));
}

}  // namespace

SynthWorldConfig::SynthWorldConfig() {
  crop_mix = {0.20, 0.10, 0.10, 0.09, 0.08, 0.08, 0.07, 0.06, 0.05, 0.05, 0.04, 0.04, 0.04};
  //            len      peak  vv   vh   blue  green
  templates = {{
      {120, 150, 0.85, 1.5, 2.0, 0.010, 0.060},  // Wheat
      {300, 420, 0.90, 6.0, 8.0, 0.020, 0.080},  // Sugarcane
      {90, 110, 0.75, 3.0, 2.0, 0.030, 0.040},   // Soybeans
      {110, 135, 0.70, 4.5, 2.0, 0.040, 0.090},  // Mustard
      {100, 130, 0.88, 6.0, 2.0, 0.015, 0.050},  // Corn
      {110, 140, 0.82, 1.5, 4.0, 0.025, 0.070},  // Rice
      {150, 190, 0.72, 3.0, 4.0, 0.035, 0.030},  // Cotton
      {95, 120, 0.65, 4.5, 4.0, 0.010, 0.035},   // Gram
      {100, 130, 0.78, 6.0, 4.0, 0.030, 0.065},  // Sorghum
      {100, 125, 0.68, 1.5, 6.0, 0.020, 0.045},  // Groundnut
      {140, 180, 0.74, 3.0, 6.0, 0.045, 0.055},  // Chilli
      {80, 100, 0.70, 4.5, 6.0, 0.015, 0.025},   // Bajra
      {90, 150, 0.66, 6.0, 6.0, 0.050, 0.060},   // Others
  }};
}

void SynthWorldConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::ConfigError, std::string(name) + " must be in [0, 1]");
  };
  prob(cloud_probability, "cloud_probability");
  prob(fallow_probability, "fallow_probability");
  prob(off_field_fraction, "off_field_fraction");
  prob(off_season_fraction, "off_season_fraction");
  prob(off_field_fraction + off_season_fraction, "off_field_fraction + off_season_fraction");
  if (num_fields < 0 || points_per_field < 1 || span_end <= span_start || regions_lat < 1 || regions_lng < 1) {
    throw Error(ErrorCode::ConfigError, "invalid synthetic world extent");
  }
  if (noise_std < 0.0 || s1_noise_db < 0.0) throw Error(ErrorCode::ConfigError, "noise must be non-negative");
  double total = 0.0;
  for (double w : crop_mix) {
    if (!(w >= 0.0)) throw Error(ErrorCode::ConfigError, "crop mix weights must be non-negative");
    total += w;
  }
  if (total <= 0.0) throw Error(ErrorCode::ConfigError, "crop mix is empty");
  for (int c = 0; c < kNumNamedCrops; ++c) {
    const auto& t = templates[static_cast<std::size_t>(c)];
    if (t.length_min < 1 || t.length_max < t.length_min || t.length_max > max_season_length(crop_from_index(c))) {
      throw Error(ErrorCode::ConfigError,
                  "season length range of " + std::string(crop_name(crop_from_index(c))) + " exceeds its bound");
    }
  }
  for (const auto& t : templates) {
    if (t.peak_ndvi <= kVegThreshold || t.peak_ndvi > 1.0) throw Error(ErrorCode::ConfigError, "peak NDVI out of range");
  }
}

std::string_view to_string(LabelTag tag) {
  switch (tag) {
    case LabelTag::Clean: return "clean";
    case LabelTag::OffField: return "off_field";
    case LabelTag::OffSeason: return "off_season";
  }
  return "?";
}

LabelTag parse_label_tag(std::string_view text) {
  for (LabelTag t : {LabelTag::Clean, LabelTag::OffField, LabelTag::OffSeason}) {
    if (to_string(t) == text) return t;
  }
  throw Error(ErrorCode::ParseError, "unknown label tag '" + std::string(text) + "'");
}

std::string field_id_for(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "F%06d", index);
  return buf;
}

SynthWorld generate_world(const SynthWorldConfig& config) {
  config.validate();
  SynthWorld world;
  const long rows = std::max(1L, static_cast<long>(config.lat_span / config.site_spacing_deg));
  const long cols = std::max(1L, static_cast<long>(config.lng_span / config.site_spacing_deg));
  if (config.num_fields > rows * cols / 2) throw Error(ErrorCode::ConfigError, "too many fields for the world extent");

  Rng site_rng(derive_seed(config.seed, kWorldStream));
  std::set<std::pair<long, long>> used;
  std::vector<std::pair<long, long>> sites;
  while (static_cast<int>(sites.size()) < config.num_fields) {
    const long r = static_cast<long>(site_rng() % static_cast<std::uint64_t>(rows));
    const long c = static_cast<long>(site_rng() % static_cast<std::uint64_t>(cols));
    if (used.insert({r, c}).second) sites.emplace_back(r, c);
  }

  // Calendar windows: monsoon sowing in June, winter sowing mid-November to mid-December.
  std::vector<rsd::Window> windows;
  for (int y = year_of(config.span_start); y <= year_of(config.span_end); ++y) {
    windows.push_back({make_day(y, 6, 1), make_day(y, 6, 30)});
    windows.push_back({make_day(y, 11, 10), make_day(y, 12, 10)});
  }

  world.fields.resize(sites.size());
  world.truth.fields.resize(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    Rng rng(derive_seed(config.seed, kWorldStream, i + 1));
    const auto [r, c] = sites[i];
    const double max_offset = 0.15 * config.site_spacing_deg;
    const rsd::GeoPoint center{config.lat_origin + (static_cast<double>(r) + 0.5) * config.site_spacing_deg +
                              uniform(rng, -max_offset, max_offset),
                          config.lng_origin + (static_cast<double>(c) + 0.5) * config.site_spacing_deg +
                              uniform(rng, -max_offset, max_offset)};
    const double area_m2 = uniform(rng, 2000.0, 50000.0);
    const double aspect = uniform(rng, 0.7, 1.4);
    const double w = std::sqrt(area_m2 * aspect);
    const double h = area_m2 / w;
    const datagen::LocalProjection proj(center);
    datagen::FieldBoundary& field = world.fields[i];
    field.field_id = field_id_for(static_cast<int>(i));
    for (const auto& [sx, sy] : {std::pair{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}) {
      const double jx = uniform(rng, -0.03, 0.03) * w;
      const double jy = uniform(rng, -0.03, 0.03) * h;
      field.polygon.push_back(proj.to_geo({sx * w + jx, sy * h + jy}));
    }
    field.area_ha = datagen::polygon_area_ha(field.polygon);
    const long region_r = r * config.regions_lat / rows;
    const long region_c = c * config.regions_lng / cols;
    field.region = "R" + std::to_string(region_r * config.regions_lng + region_c + 1);

    FieldTruth& truth = world.truth.fields[i];
    truth.field_id = field.field_id;
    auto interior = datagen::sample_interior_points(field, 10.0, 10.0);
    const std::size_t keep = std::min<std::size_t>(interior.size(), static_cast<std::size_t>(config.points_per_field));
    for (std::size_t k = 0; k < keep; ++k) {
      std::swap(interior[k], interior[k + static_cast<std::size_t>(rng() % (interior.size() - k))]);
      truth.points.push_back(interior[k]);
    }

    Day cursor = config.span_start + 20;
    for (const auto& win : windows) {
      if (win.last < cursor) continue;
      const bool fallow = uniform(rng, 0.0, 1.0) < config.fallow_probability;
      const Day sow_draw = win.first + uniform_int(rng, 0, win.last - win.first);
      const Day sow = std::max(sow_draw, cursor + uniform_int(rng, 0, 15));
      const CropLabel crop = draw_crop(config.crop_mix, rng);
      const auto& tpl = config.templates[static_cast<std::size_t>(class_index(crop))];
      const int length = uniform_int(rng, tpl.length_min, tpl.length_max);
      const std::size_t other_name = static_cast<std::size_t>(rng() % std::size(kOtherCropNames));
      if (fallow) continue;
      if (sow + length > config.span_end - 10) break;
      TrueSeason s;
      s.crop = crop;
      s.crop_name = crop == CropLabel::Others ? kOtherCropNames[other_name] : std::string(crop_name(crop));
      s.start = sow;
      s.end = sow + length;
      truth.seasons.push_back(s);
      cursor = s.end + config.min_gap_days;
    }
  }
  return world;
}

double true_ndvi(const FieldTruth& field, const SynthWorldConfig& config, Day day) {
  return state_at(field, config, day).ndvi;
}

datagen::ObservationStore generate_observations(const SynthWorld& world, const SynthWorldConfig& config,
                                                int threads) {
  const rsd::SensorLayout layout = rsd::SensorLayout::defaults();
  const int s2 = layout.index_of(rsd::kSentinel2);
  const int s1 = layout.index_of(rsd::kSentinel1);
  const auto& s2spec = layout.satellites[static_cast<std::size_t>(s2)];
  const auto& s1spec = layout.satellites[static_cast<std::size_t>(s1)];
  const int b2 = s2spec.band_index("B2"), b3 = s2spec.band_index("B3"), b4 = s2spec.band_index("B4"),
            b8 = s2spec.band_index("B8");
  const int vv = s1spec.band_index("VV"), vh = s1spec.band_index("VH");

  std::vector<std::vector<rsd::RsdSeries>> per_field(world.fields.size());
  parallel_for(world.fields.size(), threads, [&](std::size_t i) {
    const FieldTruth& truth = world.truth.fields[i];
    Rng rng(derive_seed(config.seed, kObsStream, i + 1));
    const auto s2_days = acquisition_days(config.span_start, config.span_end, 5, rng);
    const auto s1_days = acquisition_days(config.span_start, config.span_end, 6, rng);

    struct Sky {
      bool cloudy;
      double score;
      double haze;
    };
    std::vector<Sky> sky(s2_days.size());
    for (auto& s : sky) {
      s.cloudy = uniform(rng, 0.0, 1.0) < config.cloud_probability;
      s.score = s.cloudy ? uniform(rng, 0.02, 0.4) : uniform(rng, 0.75, 1.0);
      s.haze = uniform(rng, 0.25, 0.45);
    }
    std::vector<FieldState> states(s2_days.size());
    for (std::size_t k = 0; k < s2_days.size(); ++k) states[k] = state_at(truth, config, s2_days[k]);
    std::vector<RadarState> radar(s1_days.size());
    for (std::size_t k = 0; k < s1_days.size(); ++k) radar[k] = radar_at(truth, config, s1_days[k]);

    std::normal_distribution<double> noise(0.0, 1.0);
    auto& out = per_field[i];
    for (const auto& point : truth.points) {
      rsd::RsdSeries series = rsd::RsdSeries::empty_for(layout);
      series.location = point;
      auto& st2 = series.streams[static_cast<std::size_t>(s2)];
      st2.reserve(s2_days.size());
      for (std::size_t k = 0; k < s2_days.size(); ++k) {
        rsd::BandObservation obs;
        obs.day = s2_days[k];
        obs.values.assign(static_cast<std::size_t>(s2spec.band_count()), 0.0);
        const double n1 = noise(rng), n2 = noise(rng), n3 = noise(rng), n4 = noise(rng);
        if (sky[k].cloudy) {
          obs.values[static_cast<std::size_t>(b2)] = sky[k].haze + 0.02;
          obs.values[static_cast<std::size_t>(b3)] = sky[k].haze + 0.01;
          obs.values[static_cast<std::size_t>(b4)] = sky[k].haze;
          obs.values[static_cast<std::size_t>(b8)] = sky[k].haze + 0.01;
        } else {
          const FieldState& fs = states[k];
          const double nir = 0.20 + 0.25 * fs.canopy;
          const double red = nir * (1.0 - fs.ndvi) / (1.0 + fs.ndvi);
          const double blue_gain = fs.tpl ? fs.tpl->blue_gain : 0.0;
          const double green_gain = fs.tpl ? fs.tpl->green_gain : 0.0;
          obs.values[static_cast<std::size_t>(b2)] = 0.05 + blue_gain * fs.canopy;
          obs.values[static_cast<std::size_t>(b3)] = 0.07 + green_gain * fs.canopy;
          obs.values[static_cast<std::size_t>(b4)] = red;
          obs.values[static_cast<std::size_t>(b8)] = nir;
        }
        obs.values[static_cast<std::size_t>(b2)] += config.noise_std * n1;
        obs.values[static_cast<std::size_t>(b3)] += config.noise_std * n2;
        obs.values[static_cast<std::size_t>(b4)] += config.noise_std * n3;
        obs.values[static_cast<std::size_t>(b8)] += config.noise_std * n4;
        obs.cloud_score = sky[k].score;
        st2.push_back(obs);
      }
      auto& st1 = series.streams[static_cast<std::size_t>(s1)];
      st1.reserve(s1_days.size());
      for (std::size_t k = 0; k < s1_days.size(); ++k) {
        rsd::BandObservation obs;
        obs.day = s1_days[k];
        obs.values.assign(static_cast<std::size_t>(s1spec.band_count()), 0.0);
        const double n1 = noise(rng), n2 = noise(rng);
        obs.values[static_cast<std::size_t>(vv)] = -14.0 + radar[k].vv + config.s1_noise_db * n1;
        obs.values[static_cast<std::size_t>(vh)] = -22.0 + radar[k].vh + config.s1_noise_db * n2;
        st1.push_back(obs);
      }
      out.push_back(std::move(series));
    }
  });

  datagen::ObservationStore store;
  for (std::size_t i = 0; i < world.fields.size(); ++i) {
    if (!per_field[i].empty()) store.emplace(world.fields[i].field_id, std::move(per_field[i]));
  }
  return store;
}

std::vector<datagen::GroundTruthLabel> generate_labels(SynthWorld& world, const SynthWorldConfig& config) {
  std::vector<datagen::GroundTruthLabel> labels;
  world.truth.labels.clear();
  const Day first_labeled = config.span_start + config.label_history_days;
  for (std::size_t i = 0; i < world.fields.size(); ++i) {
    const auto& field = world.fields[i];
    const auto& truth = world.truth.fields[i];
    Rng rng(derive_seed(config.seed, kLabelStream, i + 1));
    const auto local = field.local_polygon();
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const auto& v : local) {
      min_x = std::min(min_x, v.x);
      max_x = std::max(max_x, v.x);
      min_y = std::min(min_y, v.y);
      max_y = std::max(max_y, v.y);
    }
    const auto proj = field.projection();
    for (std::size_t s = 0; s < truth.seasons.size(); ++s) {
      const TrueSeason& season = truth.seasons[s];
      if (season.start < first_labeled || season.end > config.span_end) continue;
      const double u = uniform(rng, 0.0, 1.0);
      const LabelTag tag = u < config.off_field_fraction                                  ? LabelTag::OffField
                           : u < config.off_field_fraction + config.off_season_fraction ? LabelTag::OffSeason
                                                                                          : LabelTag::Clean;
      datagen::Vec2 p;
      do {
        p = {uniform(rng, min_x, max_x), uniform(rng, min_y, max_y)};
      } while (!datagen::point_in_polygon(p, local));
      // Surveyors record established crops, so labels stay clear of emergence and senescence.
      const int edge = std::max(kLabelEdgeDays, (season.end - season.start) / 5);
      Day day = season.start + edge + uniform_int(rng, 0, std::max(0, season.end - season.start - 2 * edge));
      rsd::GeoPoint location = proj.to_geo(p);
      if (tag == LabelTag::OffField) {
        // Midway between lattice sites, beyond the reach of any field.
        const double half = 0.5 * config.site_spacing_deg;
        const double r = std::floor((location.lat - config.lat_origin) / config.site_spacing_deg);
        const double c = std::floor((location.lng - config.lng_origin) / config.site_spacing_deg);
        location = {config.lat_origin + r * config.site_spacing_deg + 2 * half,
                    config.lng_origin + c * config.site_spacing_deg + 2 * half};
      } else if (tag == LabelTag::OffSeason) {
        const Day gap_start = s > 0 ? truth.seasons[s - 1].end : season.start - 2 * config.min_gap_days;
        day = gap_start + (season.start - gap_start) / 2;
      }
      datagen::GroundTruthLabel label;
      label.label_id = "L" + field.field_id.substr(1) + "-" + std::to_string(s);
      label.crop_name = season.crop_name;
      label.crop = group_crop(season.crop_name);
      label.location = location;
      label.day = day;
      labels.push_back(label);
      world.truth.labels.push_back({label.label_id, field.field_id, static_cast<int>(s), tag});
    }
  }
  return labels;
}

std::vector<CensusRow> census_from_truth(const SynthWorld& world, eval::SeasonRule rule, Day year_start) {
  const Day year_end = add_months(first_of_month(year_start), 12) + (year_start - first_of_month(year_start));
  std::map<std::tuple<std::string, int, int>, double> sums;
  for (std::size_t i = 0; i < world.fields.size(); ++i) {
    for (const auto& s : world.truth.fields[i].seasons) {
      if (s.start < year_start || s.start >= year_end) continue;
      const eval::SeasonTag tag = eval::season_tag(s.start, rule);
      if (tag == eval::SeasonTag::Unassigned) continue;
      sums[{world.fields[i].region, static_cast<int>(tag), class_index(s.crop)}] += world.fields[i].area_ha;
    }
  }
  std::vector<CensusRow> rows;
  for (const auto& [key, ha] : sums) {
    const auto& [region, tag, crop] = key;
    rows.push_back({region, static_cast<eval::SeasonTag>(tag), std::string(crop_name(crop_from_index(crop))), ha / 1000.0});
  }
  return rows;
}

std::string census_csv(const std::vector<CensusRow>& rows) {
  std::ostringstream out;
  out << "region,season,crop,area_kha\n";
  char buf[48];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g", r.area_kha);
    out << r.region << "," << eval::to_string(r.season) << "," << r.crop << "," << buf << "\n";
  }
  return out.str();
}

std::vector<census::FieldPrediction> perfect_predictions(const SynthWorld& world) {
  std::vector<census::FieldPrediction> out;
  for (std::size_t i = 0; i < world.fields.size(); ++i) {
    for (const auto& s : world.truth.fields[i].seasons) {
      census::FieldPrediction p;
      p.field_id = world.fields[i].field_id;
      p.region = world.fields[i].region;
      p.area_ha = world.fields[i].area_ha;
      p.inference_date = add_months(first_of_month(s.end), 1);
      p.season = {s.start, s.end};
      p.probs[static_cast<std::size_t>(class_index(s.crop))] = 1.0;
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace cropid::synth
